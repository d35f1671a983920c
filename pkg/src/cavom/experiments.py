"""Named experiments: each reproduces one figure-style dataset as CSV/JSON.

Every experiment is deterministic: identical configuration produces
byte-identical CSV files, whatever the worker count.  Sweep points are
distributed over a process pool and collected in sweep order by a single
writer.  All tunables that the underlying study leaves unstated (grid
rules, Fock cutoffs, sweep ranges, fit windows) are pinned in versioned
default config files under cavom/configs/.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from multiprocessing import get_context
from pathlib import Path

import numpy as np
from scipy import __version__ as scipy_version

from . import __version__
from .dynamics import quantum_potential
from .motional import PositionGrid
from .params import (PRESETS, PRESET_SOURCES, DriveFrequency, SystemParams,
                     derived_quantities, drive_at, get_preset,
                     solve_resonant_drive, zero_point_resolution)
from .scattering import (Channel, ZeroProbability, added_phonons,
                         conditional_transmission, family_ground_state,
                         fit_loglog_slope, g2_statistics, ideal_family,
                         reflection_spectrum, scatter_photon)
from . import fulljc


class ConfigError(ValueError):
    """Invalid experiment configuration (exit code 2 in the CLI)."""


class UnknownExperiment(ConfigError):
    pass


class InvalidRange(ConfigError):
    pass


class ComputeError(RuntimeError):
    """A sweep point failed (exit code 3 in the CLI)."""


EXPERIMENT_IDS = ("fig2", "fig3a", "fig3b", "fig4c", "fig5", "fig6",
                  "fig9", "fig10", "fig11", "custom-sweep")


def default_config(experiment: str) -> dict:
    name = experiment.replace("-", "_") + ".json"
    try:
        text = resources.files("cavom.configs").joinpath(name).read_text()
    except FileNotFoundError:
        raise UnknownExperiment(f"no default config for {experiment!r}")
    return json.loads(text)


@dataclass
class ExperimentConfig:
    experiment: str
    preset: str | None = None
    overrides: dict = field(default_factory=dict)
    out_dir: Path = Path("out")
    workers: int = 1

    def validate(self) -> dict:
        """Merge defaults with overrides and check ranges; returns the
        fully resolved setting dict."""
        if self.experiment not in EXPERIMENT_IDS:
            raise UnknownExperiment(
                f"unknown experiment {self.experiment!r}; choose from "
                + ", ".join(EXPERIMENT_IDS))
        if self.preset is not None and self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        setting = default_config(self.experiment)
        for key, value in self.overrides.items():
            setting[key] = value
        for key, value in setting.items():
            if isinstance(value, float) and not math.isfinite(value):
                raise InvalidRange(f"{key} is not finite")
        for key in ("sweep_num", "n_points"):
            if key in setting and int(setting[key]) < 1:
                raise InvalidRange(f"{key} must be a positive count")
        if "sweep_values" in setting and len(setting["sweep_values"]) == 0:
            raise InvalidRange("sweep_values is empty")
        return setting


def config_from_dict(data: dict) -> ExperimentConfig:
    if "experiment" not in data:
        raise ConfigError("config must name an experiment")
    cfg = ExperimentConfig(
        experiment=data["experiment"],
        preset=data.get("preset"),
        overrides=dict(data.get("set", {})),
        out_dir=Path(data.get("out", "out")),
        workers=int(data.get("workers", 1)))
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# helpers

def _pmap(fn, items, workers: int):
    """Order-preserving map, optionally over a process pool."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with get_context("fork").Pool(min(workers, len(items))) as pool:
        return pool.map(fn, items, chunksize=1)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _geomspace(lo: float, hi: float, num: int) -> np.ndarray:
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo <= 0 or hi <= lo or num < 2:
        raise InvalidRange(f"bad geometric range [{lo}, {hi}] x {num}")
    return np.geomspace(lo, hi, num)


def _linspace(lo: float, hi: float, num: int) -> np.ndarray:
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo or num < 2:
        raise InvalidRange(f"bad range [{lo}, {hi}] x {num}")
    return np.linspace(lo, hi, num)


def _resolve_params(config: ExperimentConfig, setting: dict) -> SystemParams:
    params = get_preset(config.preset or setting.get("preset", "fiber-I"))
    fields = {k: v for k, v in setting.items()
              if k in SystemParams.__dataclass_fields__}
    return params.replace(**fields) if fields else params


# ---------------------------------------------------------------------------
# experiment implementations (module-level workers keep them picklable)

def _run_fig2(config: ExperimentConfig, setting: dict):
    """Quantum vs classical potential profile for a lossless strongly
    dispersive system driven resonant at x_r (delta_0 = -2 g0)."""
    kappa = setting["kappa"]
    g0 = setting["g0_over_kappa"] * kappa
    g_om = g0 / 2.0                      # gamma = 0, delta_0 = -2 g0
    u2 = math.cos(setting["x_r"]) ** 2
    delta_c = -g_om * u2
    params = SystemParams(
        g0=g0, gamma=0.0, kappa_r=kappa / 2.0, kappa_t=kappa / 2.0,
        kappa_in=0.0, omega_m=kappa / 100.0, omega_rec=kappa / 10000.0,
        atom_cavity_detuning=delta_c + 2.0 * g0, x0=setting["x_r"],
        drive_amplitude=setting["drive_amplitude"])
    drive = drive_at(params, delta_c)
    grid = PositionGrid(setting["x_min"], setting["x_max"], int(setting["n_points"]))
    pot = quantum_potential(params, drive, grid)
    rows = list(zip(grid.x, pot.re_v, pot.im_v, pot.u_classical))
    return {"fig2.csv": (["x", "re_v", "im_v", "u_classical"], rows)}, {}


def _run_spectrum(config: ExperimentConfig, setting: dict, name: str):
    family = ideal_family(eta_ld=setting["eta_ld"], kappa=setting["kappa"])
    params, drive = family(setting["r_zp"])
    psi0 = family_ground_state(params, drive)
    kappa = params.kappa
    sweep = _linspace(setting["delta_c_min"], setting["delta_c_max"],
                      int(setting["sweep_num"]))
    spectrum = reflection_spectrum(psi0, params, sweep)
    empty = np.abs(1.0 - 1j * params.kappa_r / (sweep + 0.5j * kappa)) ** 2
    rows = [(dc, pr, pe) for (dc, pr), pe in zip(spectrum, empty)]
    return {f"{name}.csv": (["delta_c", "p_r", "p_r_empty"], rows)}, {}


def _fig4c_point(args):
    r_zp, eta_ld, kappa = args
    family = ideal_family(eta_ld=eta_ld, kappa=kappa)
    params, drive = family(r_zp)
    psi0 = family_ground_state(params, drive)
    outcome = scatter_photon(psi0, params, drive)
    return (r_zp, outcome.probabilities[Channel.REFLECTION],
            outcome.probabilities[Channel.TRANSMISSION])


def _run_fig4c(config: ExperimentConfig, setting: dict):
    values = _geomspace(setting["r_zp_min"], setting["r_zp_max"],
                        int(setting["sweep_num"]))
    args = [(float(r), setting["eta_ld"], setting["kappa"]) for r in values]
    rows = _pmap(_fig4c_point, args, config.workers)
    return {"fig4c.csv": (["r_zp", "p_r", "p_t"], rows)}, {}


def _fig5_point(args):
    params, delta_c = args
    drive = drive_at(params, delta_c)
    psi0 = family_ground_state(params, drive)
    outcome = scatter_photon(psi0, params, drive)
    p_r = outcome.probabilities[Channel.REFLECTION]
    p_t = outcome.probabilities[Channel.TRANSMISSION]
    p_at = outcome.probabilities[Channel.ATOMIC_EMISSION]
    ptt = conditional_transmission(psi0, params, drive)
    g2_tt, g2_rt = g2_statistics(psi0, params, drive)
    return (delta_c, p_r, p_t, p_at, ptt, g2_tt, g2_rt)


def _run_fig5(config: ExperimentConfig, setting: dict):
    params = _resolve_params(config, setting)
    kappa = params.kappa
    sweep = _linspace(setting["two_delta_c_over_kappa_min"] * kappa / 2.0,
                      setting["two_delta_c_over_kappa_max"] * kappa / 2.0,
                      int(setting["sweep_num"]))
    rows = _pmap(_fig5_point, [(params, float(dc)) for dc in sweep],
                 config.workers)
    return {"fig5.csv": (["delta_c", "p_r", "p_t", "p_at", "p_t_cond",
                          "g2_tt", "g2_rt"], rows)}, {}


def _fig6_point(args):
    r_zp, eta_ld, kappa = args
    family = ideal_family(eta_ld=eta_ld, kappa=kappa)
    params, drive = family(r_zp)
    psi0 = family_ground_state(params, drive)
    heating = added_phonons(psi0, params, drive)
    return (r_zp, heating.n_r, heating.n_t, heating.n_total)


def _run_fig6(config: ExperimentConfig, setting: dict):
    values = _geomspace(setting["r_zp_min"], setting["r_zp_max"],
                        int(setting["sweep_num"]))
    args = [(float(r), setting["eta_ld"], setting["kappa"]) for r in values]
    rows = _pmap(_fig6_point, args, config.workers)
    rows_arr = np.array(rows)

    def window_slope(column: int, window):
        mask = (rows_arr[:, 0] >= window[0] * (1 - 1e-9)) & \
               (rows_arr[:, 0] <= window[1] * (1 + 1e-9))
        slope, _ = fit_loglog_slope(rows_arr[mask, 0], rows_arr[mask, column])
        return slope

    slopes = {
        "n_t_window": list(setting["n_t_fit_window"]),
        "n_r_window": list(setting["n_r_fit_window"]),
        "slope_n_t": window_slope(2, setting["n_t_fit_window"]),
        "slope_n_r": window_slope(1, setting["n_r_fit_window"]),
    }
    return ({"fig6.csv": (["r_zp", "n_r", "n_t", "n_total"], rows)},
            {"fig6_slopes.json": slopes})


def _fig9_point(args):
    ratio, base, n_phonon = args
    return fulljc.detuning_sweep_point(ratio, base, n_phonon)


def _run_fig9(config: ExperimentConfig, setting: dict):
    base = SystemParams(**fulljc.FIG9_BASE)
    ratios = _linspace(setting["ratio_min"], setting["ratio_max"],
                       int(setting["sweep_num"]))
    points = _pmap(_fig9_point,
                   [(float(r), base, int(setting["n_phonon"])) for r in ratios],
                   config.workers)
    header = ["ratio", "p_r_eff", "p_t_eff", "p_at_eff", "n_r_eff",
              "p_r_full", "p_t_full", "p_at_full", "n_r_full"]
    rows = [tuple(p[k] for k in header) for p in points]
    eig_rows = _eigenvalue_rows(base, ratios, int(setting["n_phonon"]))
    return {"fig9.csv": (header, rows),
            "fig9_eigenvalues.csv": (["ratio", "re_lambda", "im_lambda"], eig_rows)}, {}


def _eigenvalue_rows(base: SystemParams, ratios, n_phonon: int):
    """Eigenvalue dump for diagnostics, at the middle of the sweep."""
    ratio = float(ratios[len(ratios) // 2])
    delta_0 = -base.g0 / ratio
    lor = base.g0**2 / (delta_0**2 + base.gamma**2 / 4.0)
    delta_c = lor * delta_0 * math.cos(base.x0) ** 2
    params = base.replace(atom_cavity_detuning=delta_c - delta_0)
    dec = fulljc.decompose(fulljc.build_hamiltonian(
        params, DriveFrequency(delta_c=delta_c, delta_0=delta_0), n_phonon))
    return [(ratio, lam.real, lam.imag) for lam in dec.eigenvalues]


def _fig10_point(args):
    ratio, base, n_phonon = args
    return fulljc.sideband_sweep_point(ratio, base, n_phonon)


def _run_fig10(config: ExperimentConfig, setting: dict):
    base = SystemParams(**fulljc.FIG10_BASE)
    ratios = _geomspace(setting["ratio_min"], setting["ratio_max"],
                        int(setting["sweep_num"]))
    points = _pmap(_fig10_point,
                   [(float(r), base, int(setting["n_phonon"])) for r in ratios],
                   config.workers)
    rows = [(p["ratio"], p["n_r_eff"], p["n_r_full"]) for p in points]
    return {"fig10.csv": (["ratio", "n_r_eff", "n_r_full"], rows)}, {}


def _fig11_point(args):
    detuning_over_g0, omega_m = args
    out = [detuning_over_g0]
    for preset in ("fiber-I", "fiber-II"):
        params = get_preset(preset).replace(omega_m=omega_m)
        params = params.replace(
            atom_cavity_detuning=detuning_over_g0 * params.g0)
        drive = solve_resonant_drive(params, params.x0)
        out.extend([zero_point_resolution(params, drive), drive.delta_c])
    return tuple(out)


def _run_fig11(config: ExperimentConfig, setting: dict):
    sweep = _linspace(setting["detuning_over_g0_min"],
                      setting["detuning_over_g0_max"], int(setting["sweep_num"]))
    rows = _pmap(_fig11_point, [(float(d), setting["omega_m"]) for d in sweep],
                 config.workers)
    header = ["detuning_over_g0", "r_zp_set_i", "delta_c_set_i",
              "r_zp_set_ii", "delta_c_set_ii"]
    return {"fig11.csv": (header, rows)}, {}


def _custom_point(args):
    params, delta_c, sweep_value = args
    if delta_c is None:
        drive = solve_resonant_drive(params, params.x0)
    else:
        drive = drive_at(params, delta_c)
    psi0 = family_ground_state(params, drive)
    outcome = scatter_photon(psi0, params, drive)
    heating = added_phonons(psi0, params, drive)
    p_r = outcome.probabilities[Channel.REFLECTION]
    p_t = outcome.probabilities[Channel.TRANSMISSION]
    p_at = outcome.probabilities[Channel.ATOMIC_EMISSION]
    try:
        g2_tt, g2_rt = g2_statistics(psi0, params, drive)
    except ZeroProbability:
        g2_tt = g2_rt = float("nan")
    return (sweep_value, p_r, p_t, p_at, heating.n_r, heating.n_t,
            heating.n_total, g2_tt, g2_rt)


def _run_custom(config: ExperimentConfig, setting: dict):
    key = setting.get("sweep_key")
    if not key:
        raise InvalidRange("custom-sweep needs a sweep_key")
    if "sweep_values" in setting:
        values = [float(v) for v in setting["sweep_values"]]
        if not values:
            raise InvalidRange("sweep_values is empty")
    else:
        values = list(_linspace(setting["sweep_min"], setting["sweep_max"],
                                int(setting["sweep_num"])))
    base = _resolve_params(config, setting)
    jobs = []
    for v in values:
        if key == "delta_c":
            jobs.append((base, float(v), float(v)))
        elif key in SystemParams.__dataclass_fields__:
            jobs.append((base.replace(**{key: float(v)}), None, float(v)))
        else:
            raise InvalidRange(f"cannot sweep unknown key {key!r}")
    rows = _pmap(_custom_point, jobs, config.workers)
    header = ["sweep_var", "p_r", "p_t", "p_at", "n_r", "n_t", "n_total",
              "g2_tt", "g2_rt"]
    return {"custom_sweep.csv": (header, rows)}, {}


_RUNNERS = {
    "fig2": _run_fig2,
    "fig3a": lambda c, s: _run_spectrum(c, s, "fig3a"),
    "fig3b": lambda c, s: _run_spectrum(c, s, "fig3b"),
    "fig4c": _run_fig4c,
    "fig5": _run_fig5,
    "fig6": _run_fig6,
    "fig9": _run_fig9,
    "fig10": _run_fig10,
    "fig11": _run_fig11,
    "custom-sweep": _run_custom,
}


def run_experiment(config: ExperimentConfig) -> dict:
    """Run one experiment; returns the manifest written next to the data."""
    setting = config.validate()
    out_dir = Path(config.out_dir) / config.experiment
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    try:
        csv_files, json_files = _RUNNERS[config.experiment](config, setting)
    except ConfigError:
        raise
    except Exception as exc:
        raise ComputeError(f"experiment {config.experiment} failed: {exc}") from exc

    outputs = []
    for name, (header, rows) in csv_files.items():
        path = out_dir / name
        write_csv(path, header, rows)
        outputs.append({"path": str(path), "sha256": _sha256(path),
                        "rows": len(rows)})
    for name, obj in json_files.items():
        path = out_dir / name
        path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
        outputs.append({"path": str(path), "sha256": _sha256(path)})

    manifest = {
        "experiment": config.experiment,
        "preset": config.preset,
        "setting": {k: setting[k] for k in sorted(setting)},
        "inputs_hash": hashlib.sha256(
            json.dumps(setting, sort_keys=True).encode()).hexdigest(),
        "outputs": outputs,
        "runtime_seconds": round(time.time() - started, 3),
        "versions": {
            "cavom": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy_version,
        },
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def preset_table() -> list[dict]:
    """Summary of the built-in presets with their derived figures of merit."""
    rows = []
    for name in PRESETS:
        params = get_preset(name)
        drive = solve_resonant_drive(params, params.x0)
        derived = derived_quantities(params, drive)
        rows.append({
            "name": name,
            "source": PRESET_SOURCES[name],
            "g0": params.g0,
            "gamma": params.gamma,
            "kappa": params.kappa,
            "omega_m": params.omega_m,
            "omega_rec": params.omega_rec,
            "eta_ld": params.eta_ld,
            "delta_c_resonant": drive.delta_c,
            "r_zp": derived.r_zp,
        })
    return rows
