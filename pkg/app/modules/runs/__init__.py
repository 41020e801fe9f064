from .dto import RunConfig

__all__ = ["RunConfig"]
