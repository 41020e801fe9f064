from enum import Enum


class LabelEnum(str, Enum):
    REAL = "real"
    FAKE = "fake"


class SplitEnum(str, Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"
    UNASSIGNED = "unassigned"


class FrameSamplingEnum(str, Enum):
    UNIFORM = "uniform"
    RANDOM = "random"


class TransformEnum(str, Enum):
    ROTATE = "rotate"
    TRANSPOSE = "transpose"
    HFLIP = "hflip"
    VFLIP = "vflip"
    GAUSS_NOISE = "gauss_noise"
    SHIFT_SCALE_ROTATE = "shift_scale_rotate"
    CLAHE = "clahe"
    SHARPEN = "sharpen"
    EMBOSS = "emboss"
    BRIGHTNESS_CONTRAST = "brightness_contrast"
    HUE_SATURATION = "hue_saturation"
