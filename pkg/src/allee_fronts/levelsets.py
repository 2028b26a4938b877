"""Level-set extraction and front kinematics."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FitError

LINEAR_MAX_Q = 1.15
ACCEL_MIN_Q = 1.3
MIN_R2 = 0.98


def extract_level(state, lam: float) -> tuple[float, float] | None:
    """Leftmost and rightmost crossing of ``u = lam``, or ``None``.

    Crossings are sign changes of ``u - lam`` located by linear interpolation
    inside the bracketing cell.  A node exactly at ``lam`` counts once.
    """
    if not 0 < lam < 1:
        raise DomainError(f"level must lie in (0, 1), got {lam}")
    u = np.asarray(state.values, dtype=float)
    above = u > lam
    cells = np.flatnonzero(above[:-1] != above[1:])
    if cells.size == 0:
        return None

    def locate(i: int) -> float:
        a, b = u[i] - lam, u[i + 1] - lam
        return state.x_left + state.dx * (i + a / (a - b))

    return locate(int(cells[0])), locate(int(cells[-1]))


@dataclass
class LevelTrajectory:
    lam: float
    t: np.ndarray
    x_left: np.ndarray
    x_right: np.ndarray

    @classmethod
    def from_samples(cls, lam: float, samples) -> "LevelTrajectory":
        arr = np.asarray(samples, dtype=float).reshape(-1, 3)
        return cls(lam=float(lam), t=arr[:, 0].copy(), x_left=arr[:, 1].copy(), x_right=arr[:, 2].copy())

    @classmethod
    def from_positions(cls, lam: float, t, x) -> "LevelTrajectory":
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        return cls(lam=float(lam), t=t, x_left=x.copy(), x_right=x.copy())

    def __len__(self):
        return len(self.t)

    def present(self) -> np.ndarray:
        return np.isfinite(self.x_right)

    def rescaled(self, factor: float) -> "LevelTrajectory":
        return LevelTrajectory(self.lam, self.t.copy(), self.x_left * factor, self.x_right * factor)

    def subsampled(self, k: int) -> "LevelTrajectory":
        return LevelTrajectory(self.lam, self.t[::k], self.x_left[::k], self.x_right[::k])


def _fmt(v: float) -> str:
    return "" if not np.isfinite(v) else f"{v:.17g}"


def trajectories_to_csv(trajectories, fh=None) -> str:
    """Serialise trajectories as ``lambda,t,x_left,x_right`` rows (17 significant digits)."""
    buf = io.StringIO() if fh is None else fh
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lambda", "t", "x_left", "x_right"])
    for traj in trajectories:
        for t, xl, xr in zip(traj.t, traj.x_left, traj.x_right):
            writer.writerow([_fmt(traj.lam), _fmt(t), _fmt(xl), _fmt(xr)])
    return buf.getvalue() if fh is None else ""


def trajectories_from_csv(text: str) -> list[LevelTrajectory]:
    rows: dict[float, list] = {}
    for rec in csv.DictReader(io.StringIO(text)):
        lam = float(rec["lambda"])
        conv = lambda s: float(s) if s else np.nan  # noqa: E731
        rows.setdefault(lam, []).append((float(rec["t"]), conv(rec["x_left"]), conv(rec["x_right"])))
    return [LevelTrajectory.from_samples(lam, samples) for lam, samples in rows.items()]


@dataclass(frozen=True)
class KinematicsFit:
    t_min: float
    t_max: float
    q: float
    m: float
    c_fit: float
    intercept: float
    r2_power: float
    r2_linear: float
    n: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _r2(y: np.ndarray, yhat: np.ndarray) -> float:
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else 0.0
    return 1.0 - ss_res / ss_tot


def default_window(traj: LevelTrajectory) -> tuple[float, float]:
    t_end = float(np.max(traj.t))
    return t_end / 10.0, t_end


def fit_growth(traj: LevelTrajectory, window: tuple[float, float] | None = None,
               min_samples: int = 10) -> KinematicsFit:
    """Fit ``x ~ m t**q`` (log-log) and ``x ~ c t + b`` to the rightmost crossing."""
    t_min, t_max = default_window(traj) if window is None else window
    if not t_min < t_max:
        raise FitError("fit window needs t_min < t_max")
    sel = (traj.t >= t_min) & (traj.t <= t_max) & traj.present() & (traj.t > 0)
    sel &= np.where(np.isfinite(traj.x_right), traj.x_right, -1.0) > 0
    if np.count_nonzero(sel) < min_samples:
        raise FitError(f"only {np.count_nonzero(sel)} usable samples in [{t_min:g}, {t_max:g}]; "
                       f"need {min_samples}")
    t, x = traj.t[sel], traj.x_right[sel]
    lt, lx = np.log(t), np.log(x)
    q, logm = np.polyfit(lt, lx, 1)
    c, b = np.polyfit(t, x, 1)
    return KinematicsFit(
        t_min=float(t_min), t_max=float(t_max), q=float(q), m=float(np.exp(logm)),
        c_fit=float(c), intercept=float(b),
        r2_power=_r2(lx, q * lt + logm), r2_linear=_r2(x, c * t + b), n=int(sel.sum()),
    )


def detect_regime_empirical(traj: LevelTrajectory, window: tuple[float, float] | None = None,
                            linear_max: float = LINEAR_MAX_Q, accel_min: float = ACCEL_MIN_Q,
                            min_r2: float = MIN_R2) -> tuple[str, KinematicsFit]:
    """Call ``linear`` / ``accelerating`` / ``undecided`` from the fitted exponent."""
    if window is None:
        t_end = float(np.max(traj.t))
        window = (max(10.0, t_end / 10.0), t_end)
    if window[1] < 10.0 * window[0] * (1 - 1e-9):
        raise FitError("regime detection needs a window spanning at least one decade of time")
    fit = fit_growth(traj, window)
    if fit.r2_power >= min_r2 and fit.q <= linear_max:
        return "linear", fit
    if fit.r2_power >= min_r2 and fit.q >= accel_min:
        return "accelerating", fit
    return "undecided", fit
