from collections.abc import Callable
from dataclasses import dataclass, field

from modules.networks import ScalePresetEnum
from networks.base import Detector
from shared.exceptions import DuplicateDetectorError, NotBundledError, UnknownDetectorError

DetectorConstructor = Callable[[ScalePresetEnum], Detector]


@dataclass(frozen=True)
class DetectorHandle:
    name: str
    constructor: DetectorConstructor
    bundled: bool = True
    description: str = ""

    def build(self, preset: ScalePresetEnum | str = ScalePresetEnum.DESK) -> Detector:
        return self.constructor(ScalePresetEnum(preset))


@dataclass
class DetectorRegistry:
    """Name -> constructor table; names double as the CLI ``--model`` vocabulary."""

    _handles: dict[str, DetectorHandle] = field(default_factory=dict)

    def register(
        self,
        name: str,
        constructor: DetectorConstructor | None = None,
        bundled: bool = True,
        description: str = "",
    ):
        """
        Registers a constructor; usable directly or as a decorator
        :param name: unique detector name
        :param constructor: preset -> Detector
        """

        def add(fn: DetectorConstructor) -> DetectorConstructor:
            if name in self._handles:
                raise DuplicateDetectorError(f"detector {name!r} is already registered")
            self._handles[name] = DetectorHandle(
                name=name, constructor=fn, bundled=bundled, description=description
            )
            return fn

        if constructor is None:
            return add
        add(constructor)
        return constructor

    def get(self, name: str) -> DetectorHandle:
        try:
            return self._handles[name]
        except KeyError:
            raise UnknownDetectorError(name) from None

    def names(self) -> list[str]:
        return sorted(self._handles)

    def handles(self) -> list[DetectorHandle]:
        return [self._handles[name] for name in self.names()]


def reserved(name: str) -> DetectorConstructor:
    def constructor(preset: ScalePresetEnum) -> Detector:
        raise NotBundledError(name)

    return constructor
