from .base_reponse import base_response

__all__ = [
    "base_response",
]
