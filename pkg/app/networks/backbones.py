"""
Simplified ConvNeXt-like and Swin-like backbones.

They keep the interface shapes of the tiny variants (patchify stem, stage
widths, windowed attention with shifted windows) without their exact
internals. The hybrid wires them the way timm's HybridEmbed does: the Swin
patch embedding is replaced by a CNN followed by a 1x1 projection.
"""
import torch
from torch import nn

from modules.networks import BackboneConfig, BackboneKindEnum
from shared.exceptions import ShapeMismatchError
from utils.nn_primitives import gelu

MASK_FILL = -100.0


class LayerNorm2d(nn.LayerNorm):
    """LayerNorm over the channel axis of an NCHW tensor."""

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return super().forward(x.permute(0, 2, 3, 1)).permute(0, 3, 1, 2)


class Mlp(nn.Module):
    def __init__(self, dim: int, ratio: int):
        super().__init__()
        self.fc1 = nn.Linear(dim, dim * ratio)
        self.fc2 = nn.Linear(dim * ratio, dim)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.fc2(gelu(self.fc1(x)))


class ConvNeXtBlock(nn.Module):
    def __init__(self, dim: int, mlp_ratio: int, layer_scale: float = 1e-6):
        super().__init__()
        self.dwconv = nn.Conv2d(dim, dim, kernel_size=7, padding=3, groups=dim)
        self.norm = nn.LayerNorm(dim)
        self.mlp = Mlp(dim, mlp_ratio)
        self.gamma = nn.Parameter(torch.full((dim,), layer_scale))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        y = self.dwconv(x).permute(0, 2, 3, 1)
        y = self.gamma * self.mlp(self.norm(y))
        return x + y.permute(0, 3, 1, 2)


class ConvNeXtLike(nn.Module):
    def __init__(self, cfg: BackboneConfig, in_channels: int = 3):
        super().__init__()
        if cfg.kind != BackboneKindEnum.CONVNEXT_LIKE:
            raise ValueError(f"expected a convnext_like config, got {cfg.kind.value}")
        self.cfg = cfg
        self.stem = nn.Sequential(
            nn.Conv2d(in_channels, cfg.width[0], kernel_size=cfg.patch_size, stride=cfg.patch_size),
            LayerNorm2d(cfg.width[0]),
        )
        self.stages = nn.ModuleList()
        for index, (depth, width) in enumerate(zip(cfg.depth, cfg.width)):
            layers: list[nn.Module] = []
            if index:
                layers += [
                    LayerNorm2d(cfg.width[index - 1]),
                    nn.Conv2d(cfg.width[index - 1], width, kernel_size=2, stride=2),
                ]
            layers += [ConvNeXtBlock(width, cfg.mlp_ratio) for _ in range(depth)]
            self.stages.append(nn.Sequential(*layers))

    @property
    def out_channels(self) -> int:
        return self.cfg.out_channels

    @property
    def reduction(self) -> int:
        return self.cfg.patch_size * 2 ** (len(self.cfg.depth) - 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """
        :param x: images (B, C, H, W)
        :return: feature map (B, C', H / reduction, W / reduction)
        """
        if x.ndim != 4 or x.shape[-1] % self.reduction or x.shape[-2] % self.reduction:
            raise ShapeMismatchError(
                f"convnext_like needs (B, C, H, W) with H, W divisible by "
                f"{self.reduction}, got {tuple(x.shape)}"
            )
        x = self.stem(x)
        for stage in self.stages:
            x = stage(x)
        return x


def hybrid_embed(features: torch.Tensor, projection: nn.Conv2d) -> torch.Tensor:
    """
    Projects CNN features to token width and lays them out as a sequence
    :param features: (C, H, W) or (B, C, H, W)
    :param projection: 1x1 convolution to the token width
    :return: (H*W, E) or (B, H*W, E)
    """
    unbatched = features.ndim == 3
    if unbatched:
        features = features.unsqueeze(0)
    tokens = projection(features).flatten(2).transpose(1, 2)
    return tokens[0] if unbatched else tokens


class PatchEmbed(nn.Module):
    def __init__(self, in_channels: int, embed_dim: int, patch_size: int):
        super().__init__()
        self.patch_size = patch_size
        self.proj = nn.Conv2d(in_channels, embed_dim, kernel_size=patch_size, stride=patch_size)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, tuple[int, int]]:
        if x.shape[-1] % self.patch_size or x.shape[-2] % self.patch_size:
            raise ShapeMismatchError(
                f"image side must be divisible by patch size {self.patch_size}"
            )
        x = self.proj(x)
        return x.flatten(2).transpose(1, 2), (x.shape[-2], x.shape[-1])


class HybridEmbed(nn.Module):
    """CNN feature extractor followed by a 1x1 projection to the token width."""

    def __init__(self, backbone: ConvNeXtLike, embed_dim: int):
        super().__init__()
        self.backbone = backbone
        self.proj = nn.Conv2d(backbone.out_channels, embed_dim, kernel_size=1)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, tuple[int, int]]:
        features = self.backbone(x)
        return hybrid_embed(features, self.proj), (features.shape[-2], features.shape[-1])


def window_partition(x: torch.Tensor, window: int) -> torch.Tensor:
    b, h, w, c = x.shape
    x = x.view(b, h // window, window, w // window, window, c)
    return x.permute(0, 1, 3, 2, 4, 5).reshape(-1, window * window, c)


def window_reverse(windows: torch.Tensor, window: int, h: int, w: int) -> torch.Tensor:
    b = windows.shape[0] // ((h // window) * (w // window))
    x = windows.view(b, h // window, w // window, window, window, -1)
    return x.permute(0, 1, 3, 2, 4, 5).reshape(b, h, w, -1)


def shifted_window_mask(h: int, w: int, window: int, shift: int) -> torch.Tensor:
    """Additive mask (num_windows, N, N) keeping attention inside shifted regions."""
    regions = torch.zeros(1, h, w, 1)
    bands = (slice(0, -window), slice(-window, -shift), slice(-shift, None))
    label = 0
    for rows in bands:
        for cols in bands:
            regions[:, rows, cols, :] = label
            label += 1
    ids = window_partition(regions, window).squeeze(-1)
    mask = ids.unsqueeze(1) - ids.unsqueeze(2)
    return mask.masked_fill(mask != 0, MASK_FILL).masked_fill(mask == 0, 0.0)


class WindowAttention(nn.Module):
    def __init__(self, dim: int, num_heads: int):
        super().__init__()
        self.num_heads = num_heads
        self.scale = (dim // num_heads) ** -0.5
        self.qkv = nn.Linear(dim, dim * 3)
        self.proj = nn.Linear(dim, dim)

    def forward(
        self, x: torch.Tensor, mask: torch.Tensor | None = None
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """
        :param x: (B*windows, N, C) window tokens
        :return: projected tokens and the softmaxed attention (B*windows, heads, N, N)
        """
        bw, n, c = x.shape
        qkv = self.qkv(x).reshape(bw, n, 3, self.num_heads, c // self.num_heads)
        q, k, v = qkv.permute(2, 0, 3, 1, 4)
        attn = (q * self.scale) @ k.transpose(-2, -1)
        if mask is not None:
            num_windows = mask.shape[0]
            attn = attn.view(bw // num_windows, num_windows, self.num_heads, n, n)
            attn = (attn + mask.to(attn.dtype).unsqueeze(1).unsqueeze(0)).view(
                bw, self.num_heads, n, n
            )
        attn = attn.softmax(dim=-1)
        out = (attn @ v).transpose(1, 2).reshape(bw, n, c)
        return self.proj(out), attn


class SwinBlock(nn.Module):
    def __init__(self, dim: int, num_heads: int, window: int, shifted: bool, mlp_ratio: int):
        super().__init__()
        self.window = window
        self.shifted = shifted
        self.norm1 = nn.LayerNorm(dim)
        self.attn = WindowAttention(dim, num_heads)
        self.norm2 = nn.LayerNorm(dim)
        self.mlp = Mlp(dim, mlp_ratio)

    def forward(
        self, x: torch.Tensor, grid: tuple[int, int]
    ) -> tuple[torch.Tensor, torch.Tensor]:
        h, w = grid
        b, _, c = x.shape
        shift = self.window // 2 if self.shifted and min(h, w) > self.window else 0
        y = self.norm1(x).view(b, h, w, c)
        mask = None
        if shift:
            y = torch.roll(y, shifts=(-shift, -shift), dims=(1, 2))
            mask = shifted_window_mask(h, w, self.window, shift).to(x.device)
        y, attention = self.attn(window_partition(y, self.window), mask)
        y = window_reverse(y, self.window, h, w)
        if shift:
            y = torch.roll(y, shifts=(shift, shift), dims=(1, 2))
        x = x + y.reshape(b, h * w, c)
        return x + self.mlp(self.norm2(x)), attention


class PatchMerging(nn.Module):
    """2x2 neighbourhood merge that keeps the token width."""

    def __init__(self, dim: int):
        super().__init__()
        self.norm = nn.LayerNorm(4 * dim)
        self.reduction = nn.Linear(4 * dim, dim, bias=False)

    def forward(self, x: torch.Tensor, grid: tuple[int, int]) -> tuple[torch.Tensor, tuple[int, int]]:
        h, w = grid
        b, _, c = x.shape
        x = x.view(b, h, w, c)
        x = torch.cat(
            [x[:, 0::2, 0::2], x[:, 1::2, 0::2], x[:, 0::2, 1::2], x[:, 1::2, 1::2]], dim=-1
        )
        x = self.reduction(self.norm(x.view(b, -1, 4 * c)))
        return x, (h // 2, w // 2)


class SwinLike(nn.Module):
    def __init__(self, cfg: BackboneConfig, in_channels: int = 3):
        super().__init__()
        if cfg.kind != BackboneKindEnum.SWIN_LIKE:
            raise ValueError(f"expected a swin_like config, got {cfg.kind.value}")
        self.cfg = cfg
        dim = cfg.width[0]
        self.patch_embed: nn.Module = PatchEmbed(in_channels, dim, cfg.patch_size)
        self.stages = nn.ModuleList(
            nn.ModuleList(
                SwinBlock(dim, cfg.num_heads, cfg.window, shifted=bool(i % 2), mlp_ratio=cfg.mlp_ratio)
                for i in range(depth)
            )
            for depth in cfg.depth
        )
        self.merges = nn.ModuleList(PatchMerging(dim) for _ in cfg.depth[1:])
        self.norm = nn.LayerNorm(dim)

    @property
    def num_features(self) -> int:
        return self.cfg.width[0]

    def _check_grid(self, grid: tuple[int, int]) -> None:
        h, w = grid
        if h % self.cfg.window or w % self.cfg.window:
            raise ShapeMismatchError(
                f"window {self.cfg.window} does not divide the {h}x{w} feature map"
            )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """
        :param x: input accepted by ``patch_embed``
        :return: pooled features (B, E)
        """
        return self.forward_with_attention(x)[0]

    def forward_with_attention(self, x: torch.Tensor) -> tuple[torch.Tensor, list[torch.Tensor]]:
        """Pooled features plus the attention map of every block, in order."""
        maps: list[torch.Tensor] = []
        tokens, grid = self.patch_embed(x)
        for index, blocks in enumerate(self.stages):
            if index:
                if grid[0] % 2 or grid[1] % 2:
                    raise ShapeMismatchError(f"cannot merge an odd {grid[0]}x{grid[1]} grid")
                tokens, grid = self.merges[index - 1](tokens, grid)
            self._check_grid(grid)
            for block in blocks:
                tokens, attention = block(tokens, grid)
                maps.append(attention)
        return self.norm(tokens).mean(dim=1), maps


def build_backbone(cfg: BackboneConfig, in_channels: int = 3) -> nn.Module:
    if cfg.kind == BackboneKindEnum.CONVNEXT_LIKE:
        return ConvNeXtLike(cfg, in_channels)
    return SwinLike(cfg, in_channels)


class HybridTransformer(SwinLike):
    """Swin-like transformer fed by a ConvNeXt-like CNN through HybridEmbed."""

    def __init__(self, convnext: BackboneConfig, swin: BackboneConfig, in_channels: int = 3):
        super().__init__(swin, in_channels)
        self.patch_embed = HybridEmbed(ConvNeXtLike(convnext, in_channels), swin.width[0])
