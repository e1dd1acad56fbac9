"""Orbits through the annulus ledger, escape rendering and dimension estimates.

Regions partition the plane by modulus:

* ``D1``: ``|z| < R_1/4``
* ``A(k)``: ``R_k/4 <= |z| <= 4R_k`` (closed)
* ``B(k)``: ``4R_k < |z| < R_{k+1}/4`` (open)
* ``OutOfLedger``: beyond the last classifiable band

Entering a B band is conclusive (B_k maps into B_{k+1}, so the orbit escapes
fast).  ``JuliaCandidate`` marks orbits that climb out of the ledger through
the A annuli without ever landing in a B band; it is a label relative to the
ledger depth and budget, not a membership proof.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from scipy import ndimage, stats

from .builder import Construction, f_truncated, level_index, thread_count
from .errors import DegenerateFit, EmptySet, OutOfRange, TranscendError
from .extrange import LN2, LogComplex, ModInterval

# region kinds
D1, A, B, OUT, AMBIG = 0, 1, 2, 3, 4
KIND_NAMES = {D1: "D1", A: "A", B: "B", OUT: "OutOfLedger", AMBIG: "Ambiguous"}

# final classes
FAST_ESCAPING, JULIA_CANDIDATE, TRAPPED_D1, BUDGET = 0, 1, 2, 3
CLASS_NAMES = ("FastEscaping", "JuliaCandidate", "TrappedD1", "Budget")
PALETTE = np.array([[40, 70, 160], [250, 250, 250], [20, 20, 20], [200, 60, 60]], dtype=np.uint8)

DEFAULT_BUDGET = 64


class Region(NamedTuple):
    kind: int
    k: int = 0

    def __str__(self) -> str:
        if self.kind in (A, B):
            return f"{KIND_NAMES[self.kind]}({self.k})"
        return KIND_NAMES[self.kind]


def _edges(c: Construction):
    logR = np.array([lv.logR for lv in c.levels])
    return logR - 2 * LN2, logR + 2 * LN2


def classify_codes(c: Construction, log_mod) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized region kinds and indices for log-moduli."""
    x = np.asarray(log_mod, dtype=np.float64)
    lo, hi = _edges(c)
    K = c.K
    i = np.searchsorted(lo, x, side="right")  # number of A_k with R_k/4 <= |z|
    kind = np.full(x.shape, OUT, dtype=np.uint8)
    kk = np.asarray(i, dtype=np.int64).copy()
    kind[i == 0] = D1
    inside = i > 0
    ic = np.clip(i, 1, K) - 1
    in_a = inside & (x <= hi[ic])
    kind[in_a] = A
    gap = inside & ~in_a
    top = c.logR_next - 2 * LN2 if c.logR_next is not None else -np.inf
    in_b = gap & ((i < K) | (x < top))
    kind[in_b] = B
    kk[(kind == D1) | (kind == OUT)] = 0
    return kind, kk


def classify_region(c: Construction, log_modulus) -> Region:
    """Region of a log-modulus, or of a ModInterval (Ambiguous if it straddles)."""
    if isinstance(log_modulus, ModInterval):
        r1 = classify_region(c, float(log_modulus.lo_log))
        r2 = classify_region(c, float(log_modulus.hi_log))
        return r1 if r1 == r2 else Region(AMBIG)
    kind, kk = classify_codes(c, float(log_modulus))
    return Region(int(kind), int(kk))


# ---------------------------------------------------------------------------
# orbits
# ---------------------------------------------------------------------------


@dataclass
class OrbitRecord:
    start: complex
    steps: List[Tuple[Region, float]] = field(default_factory=list)
    final_class: str = "Budget"

    @property
    def regions(self) -> List[Region]:
        return [r for r, _ in self.steps]


def _step(c: Construction, z: LogComplex):
    """One application of f; returns (value, tail) or raises on failure."""
    k = int(level_index(c, z.log_abs()))
    if k > c.K:
        raise OutOfRange("point lies beyond 4 R_K")
    v = f_truncated(c, z, k)
    return v, 8.0 * math.exp(-c.level(k).logR)


def iterate_orbit(c: Construction, z0: complex, budget: int = DEFAULT_BUDGET) -> OrbitRecord:
    """Follow z0 under f, recording the region of every iterate."""
    z = LogComplex.from_complex(complex(z0))
    rec = OrbitRecord(complex(z0))
    all_d1 = True
    lm = float(z.log_abs())
    reg = classify_region(c, lm)
    rec.steps.append((reg, lm))
    for n in range(budget + 1):
        if reg.kind == B:
            rec.final_class = CLASS_NAMES[FAST_ESCAPING]
            return rec
        if reg.kind == OUT:
            rec.final_class = CLASS_NAMES[JULIA_CANDIDATE]
            return rec
        if reg.kind != D1:
            all_d1 = False
        if n == budget:
            break
        try:
            v, tail = _step(c, z)
        except TranscendError:
            rec.steps.append((Region(AMBIG), math.nan))
            break
        if isinstance(v, ModInterval):
            reg = classify_region(c, v)
            rec.steps.append((reg, float(v.mid_log())))
            if reg.kind in (B, OUT):
                continue
            break
        lm = float(v.log_abs())
        band = ModInterval(lm + math.log1p(-tail), lm + math.log1p(tail)) if np.isfinite(lm) else None
        reg = classify_region(c, lm)
        if band is not None and classify_region(c, band).kind == AMBIG:
            rec.steps.append((Region(AMBIG), lm))
        else:
            rec.steps.append((reg, lm))
        z = v
    if all_d1:
        rec.final_class = CLASS_NAMES[TRAPPED_D1]
    else:
        rec.final_class = CLASS_NAMES[BUDGET]
    return rec


def iterate_many(c: Construction, z0: np.ndarray, budget: int = DEFAULT_BUDGET):
    """Vectorized orbit classification.

    Returns ``(final_class uint8, first_B_level int16, steps_used int16)``;
    ``first_B_level`` is -1 when no B band was entered.
    """
    z0 = np.asarray(z0, dtype=np.complex128).ravel()
    npts = z0.size
    cls = np.full(npts, BUDGET, dtype=np.uint8)
    first_b = np.full(npts, -1, dtype=np.int16)
    steps = np.zeros(npts, dtype=np.int16)
    all_d1 = np.ones(npts, dtype=bool)
    z = LogComplex.from_complex(z0)
    lmag, arg, zero = z.log_mag.copy(), z.arg.copy(), z.is_zero.copy()
    active = np.arange(npts)
    for n in range(budget + 1):
        if active.size == 0:
            break
        la = np.where(zero[active], -np.inf, lmag[active])
        kind, kk = classify_codes(c, la)
        hit_b = kind == B
        cls[active[hit_b]] = FAST_ESCAPING
        first_b[active[hit_b]] = kk[hit_b]
        out = kind == OUT
        cls[active[out]] = JULIA_CANDIDATE
        all_d1[active[kind != D1]] = False
        active = active[~(hit_b | out)]
        if n == budget or active.size == 0:
            break
        steps[active] += 1
        ks = level_index(c, np.where(zero[active], -np.inf, lmag[active]))
        failed = []
        for k in np.unique(ks):
            sel = active[ks == k]
            zz = LogComplex(lmag[sel], arg[sel], zero[sel])
            try:
                v = f_truncated(c, zz, int(k))
            except TranscendError:
                failed.append(sel)
                continue
            if isinstance(v, ModInterval):
                # modulus only: classify once, then stop following these points
                kind2, kk2 = classify_codes(c, v.mid_log())
                b2 = kind2 == B
                cls[sel[b2]] = FAST_ESCAPING
                first_b[sel[b2]] = kk2[b2]
                cls[sel[kind2 == OUT]] = JULIA_CANDIDATE
                failed.append(sel)
                continue
            lmag[sel], arg[sel], zero[sel] = v.log_mag, v.arg, v.is_zero
        if failed:
            active = np.setdiff1d(active, np.concatenate(failed), assume_unique=True)
    trapped = (cls == BUDGET) & all_d1
    cls[trapped] = TRAPPED_D1
    return cls, first_b, steps


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Window:
    center: complex
    width: float
    height: float

    def pixel_centers(self, nx: int, ny: int) -> np.ndarray:
        """Complex pixel centers; row 0 is the top edge."""
        xs = self.center.real - self.width / 2 + (np.arange(nx) + 0.5) * (self.width / nx)
        ys = self.center.imag + self.height / 2 - (np.arange(ny) + 0.5) * (self.height / ny)
        return xs[None, :] + 1j * ys[:, None]

    def max_modulus(self) -> float:
        return abs(complex(abs(self.center.real) + self.width / 2, abs(self.center.imag) + self.height / 2))

    def to_json(self) -> dict:
        return {"center": [float.hex(self.center.real), float.hex(self.center.imag)],
                "width": float.hex(self.width), "height": float.hex(self.height)}


def a1_window(c: Construction) -> Window:
    """Square window centered at 0 covering the disk |z| <= 4R_1."""
    side = 8.0 * math.exp(c.level(1).logR)
    return Window(0j, side, side)


@dataclass
class Grid:
    window: Window
    resolution: Tuple[int, int]
    final_class: np.ndarray
    first_B_level: np.ndarray
    steps_used: np.ndarray
    budget: int = DEFAULT_BUDGET

    def class_fractions(self) -> dict:
        total = self.final_class.size
        return {CLASS_NAMES[i]: float(np.sum(self.final_class == i)) / total for i in range(4)}


TILE = 128


def render(c: Construction, window: Window, resolution: Tuple[int, int],
           budget: int = DEFAULT_BUDGET) -> Grid:
    """Classify every pixel center; tiles run in parallel, assembled in order."""
    nx, ny = resolution
    if math.log(window.max_modulus()) > c.level(c.K).logR + 2 * LN2:
        raise OutOfRange("window extends beyond 4 R_K")
    pts = window.pixel_centers(nx, ny)
    cls = np.empty((ny, nx), dtype=np.uint8)
    fb = np.empty((ny, nx), dtype=np.int16)
    st = np.empty((ny, nx), dtype=np.int16)
    tiles = [(y, x) for y in range(0, ny, TILE) for x in range(0, nx, TILE)]

    def work(t):
        y, x = t
        block = pts[y:y + TILE, x:x + TILE]
        a, b, s = iterate_many(c, block, budget)
        return t, block.shape, a, b, s

    threads = thread_count()
    if threads > 1 and len(tiles) > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(work, tiles))
    else:
        results = [work(t) for t in tiles]
    for (y, x), shape, a, b, s in results:
        cls[y:y + shape[0], x:x + shape[1]] = a.reshape(shape)
        fb[y:y + shape[0], x:x + shape[1]] = b.reshape(shape)
        st[y:y + shape[0], x:x + shape[1]] = s.reshape(shape)
    return Grid(window, (nx, ny), cls, fb, st, budget)


def julia_mask(g: Grid) -> np.ndarray:
    """Pixels whose right or lower neighbour carries a different
    (final_class, first_B_level) label; a one-pixel frontier between
    escape classes."""
    label = g.final_class.astype(np.int32) * 65536 + (g.first_B_level.astype(np.int32) + 1)
    mask = np.zeros(label.shape, dtype=bool)
    mask[:, :-1] |= label[:, :-1] != label[:, 1:]
    mask[:-1, :] |= label[:-1, :] != label[1:, :]
    return mask


# ---------------------------------------------------------------------------
# box counting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoxCountResult:
    epsilons: np.ndarray
    counts: np.ndarray
    slope: float
    slope_stderr: float
    intercept: float


def box_count(mask: np.ndarray, min_exp: int = 3, max_exp: Optional[int] = None) -> BoxCountResult:
    """Occupied dyadic boxes of side 2^-j (as a fraction of the window side),
    j = min_exp .. max_exp, and the least-squares slope of log N on log 1/eps."""
    mask = np.asarray(mask, dtype=bool)
    ny, nx = mask.shape
    if ny != nx or nx & (nx - 1):
        raise ValueError("mask must be square with a power-of-two side")
    top = int(math.log2(nx))
    if max_exp is None:
        max_exp = top - 2
    if max_exp > top or min_exp < 0:
        raise ValueError("box exponents out of range")
    if not mask.any():
        raise EmptySet("mask is empty")
    exps = list(range(min_exp, max_exp + 1))
    if len(exps) < 3:
        raise DegenerateFit("need at least three box scales")
    counts = []
    for j in exps:
        b = nx >> j
        counts.append(int(mask.reshape(1 << j, b, 1 << j, b).any(axis=(1, 3)).sum()))
    eps = np.array([2.0**-j for j in exps])
    counts = np.array(counts)
    fit = stats.linregress(np.log(1.0 / eps), np.log(counts))
    return BoxCountResult(eps, counts, float(fit.slope), float(fit.stderr), float(fit.intercept))


# ---------------------------------------------------------------------------
# Whitney sums
# ---------------------------------------------------------------------------


def whitney_squares(open_mask: np.ndarray):
    """Greedy coarse-to-fine dyadic Whitney cover of a pixel mask.

    A dyadic square of side s pixels is accepted when all its pixels lie in
    the set, none is already covered, and its distance to the complement is
    between s and 4s.  Pixels left over at the end (next to the boundary)
    become unit squares.  Returns a dict {side: count}.
    """
    m = np.asarray(open_mask, dtype=bool)
    if not m.any():
        raise EmptySet("open set is empty")
    ny, nx = m.shape
    size = 1 << int(math.ceil(math.log2(max(nx, ny))))
    pad = np.zeros((size, size), dtype=bool)
    pad[:ny, :nx] = m
    # distance from each pixel center to the nearest complement pixel center,
    # less half a pixel: distance from the pixel itself to the complement
    dist = ndimage.distance_transform_edt(pad) - 0.5
    dist[~pad] = -1.0
    covered = np.zeros_like(pad)
    out = {}
    s = size
    while s >= 1:
        g = size // s
        d_min = dist.reshape(g, s, g, s).min(axis=(1, 3))
        free = ~covered.reshape(g, s, g, s).any(axis=(1, 3))
        # distance from the square to the complement is at least d_min - (s-1)/2
        # and at most d_min; require it to sit inside [s, 4s]
        ok = free & (d_min >= s) & (d_min <= 4 * s) if s > 1 else free & (d_min >= 0)
        cnt = int(ok.sum())
        if cnt:
            out[s] = out.get(s, 0) + cnt
            covered |= np.kron(ok, np.ones((s, s), dtype=bool)).astype(bool)
        s //= 2
    return out


def whitney_tsum(open_mask: np.ndarray, t: float, pixel: float = 1.0) -> float:
    """Sum of diam(Q)^t over the Whitney squares of the mask."""
    if not 1.0 <= t <= 2.0:
        raise ValueError("t must lie in [1, 2]")
    sq = whitney_squares(open_mask)
    return float(sum(cnt * (math.sqrt(2.0) * s * pixel) ** t for s, cnt in sorted(sq.items())))


def annulus_mask(r: float, delta: float, n: int, half_width: Optional[float] = None):
    """Pixel mask of {r <= |z| <= r + delta} on an n x n grid; returns (mask, pixel)."""
    hw = half_width if half_width is not None else (r + delta) * 1.05
    px = 2.0 * hw / n
    c = -hw + (np.arange(n) + 0.5) * px
    rr = np.hypot(c[None, :], c[:, None])
    return (rr >= r) & (rr <= r + delta), px


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def grid_rgb(g: Grid) -> np.ndarray:
    img = PALETTE[g.final_class].copy()
    fe = g.final_class == FAST_ESCAPING
    shade = np.clip(g.first_B_level.astype(np.int32), 1, 8)
    img[fe] = (img[fe].astype(np.int32) * (9 - shade[fe, None]) // 8 + 30 * (shade[fe, None] - 1)).clip(0, 255)
    return img.astype(np.uint8)


def write_ppm(path, rgb: np.ndarray, comment: str = "") -> None:
    h, w, _ = rgb.shape
    head = b"P6\n"
    for line in comment.splitlines():
        head += b"# " + line.encode() + b"\n"
    head += f"{w} {h}\n255\n".encode()
    with open(path, "wb") as fh:
        fh.write(head + np.ascontiguousarray(rgb, dtype=np.uint8).tobytes())


def write_pbm(path, mask: np.ndarray, comment: str = "") -> None:
    h, w = mask.shape
    head = b"P4\n"
    for line in comment.splitlines():
        head += b"# " + line.encode() + b"\n"
    head += f"{w} {h}\n".encode()
    with open(path, "wb") as fh:
        fh.write(head + np.packbits(mask.astype(bool), axis=1).tobytes())


def write_png(path, rgb: np.ndarray, text: Optional[dict] = None) -> None:
    from PIL import Image, PngImagePlugin

    info = PngImagePlugin.PngInfo()
    for k, v in (text or {}).items():
        info.add_text(k, v)
    Image.fromarray(rgb, "RGB").save(path, format="PNG", pnginfo=info)
