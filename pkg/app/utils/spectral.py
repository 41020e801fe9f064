import torch

from shared.exceptions import ShapeMismatchError

LUMA = (0.299, 0.587, 0.114)
ZERO_MAGNITUDE_TOL = 1e-9
FLAT_SPAN_TOL = 1e-12


def phase_only_reconstruction(gray: torch.Tensor) -> torch.Tensor:
    """
    Inverse FFT of the unit-magnitude spectrum of ``gray`` (..., H, W).
    Bins whose magnitude is zero relative to the strongest bin stay zero.
    """
    spectrum = torch.fft.fft2(gray)
    magnitude = spectrum.abs()
    peak = magnitude.amax(dim=(-2, -1), keepdim=True)
    keep = magnitude > ZERO_MAGNITUDE_TOL * peak
    unit = torch.polar(torch.ones_like(magnitude), torch.angle(spectrum))
    unit = torch.where(keep, unit, torch.zeros_like(unit))
    return torch.fft.ifft2(unit).real


def spsl_phase_features(image: torch.Tensor) -> torch.Tensor:
    """
    Appends the phase-only reconstruction of the grayscale image as an
    extra channel scaled to [0, 1]
    :param image: (3, H, W) or (B, 3, H, W) with even H and W
    :return: (4, H, W) or (B, 4, H, W)
    """
    unbatched = image.ndim == 3
    batch = image.unsqueeze(0) if unbatched else image
    if batch.ndim != 4 or batch.shape[1] != 3:
        raise ShapeMismatchError(f"expected RGB images, got {tuple(image.shape)}")
    if batch.shape[-1] % 2 or batch.shape[-2] % 2:
        raise ShapeMismatchError(
            f"image sides must be even, got {batch.shape[-2]}x{batch.shape[-1]}"
        )
    weights = torch.tensor(LUMA, dtype=batch.dtype, device=batch.device).view(1, 3, 1, 1)
    gray = (batch * weights).sum(dim=1)
    phase = phase_only_reconstruction(gray.to(torch.float64))
    low = phase.amin(dim=(-2, -1), keepdim=True)
    span = phase.amax(dim=(-2, -1), keepdim=True) - low
    scaled = torch.where(span > FLAT_SPAN_TOL, (phase - low) / span.clamp_min(1e-12), torch.zeros_like(phase))
    out = torch.cat([batch, scaled.to(batch.dtype).unsqueeze(1)], dim=1)
    return out[0] if unbatched else out
