"""End-to-end protocol: train the consensus mapping, filter, evaluate, emit data."""
from __future__ import annotations

import configparser
import csv
import io
import logging
import shutil
import tempfile
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from . import evaluation, sco
from .errors import ConfigError
from .imageio import load_cifar_batch, write_image
from .morphology import StructuringElement, apply_operator
from .ordering import LEX_WEIGHTS, LexMapping, build_rank_lut, lex_mappings
from .voting import BordaRule

__all__ = [
    "PALETTE16",
    "METHODS",
    "resolve_ordering",
    "rank_colors",
    "color_ramp",
    "ExperimentConfig",
    "load_config",
    "run_experiment",
]

logger = logging.getLogger(__name__)

# the 16 basic web colors, 8-bit
PALETTE16 = {
    "black": (0, 0, 0),
    "maroon": (128, 0, 0),
    "green": (0, 128, 0),
    "olive": (128, 128, 0),
    "navy": (0, 0, 128),
    "purple": (128, 0, 128),
    "teal": (0, 128, 128),
    "silver": (192, 192, 192),
    "gray": (128, 128, 128),
    "red": (255, 0, 0),
    "lime": (0, 255, 0),
    "yellow": (255, 255, 0),
    "blue": (0, 0, 255),
    "fuchsia": (255, 0, 255),
    "cyan": (0, 255, 255),
    "white": (255, 255, 255),
}

METHODS = ("lex-rgb", "lex-gbr", "lex-brg", "borda", "learned")


def palette_colors() -> tuple[list[str], np.ndarray]:
    names = list(PALETTE16)
    return names, np.array([PALETTE16[n] for n in names], dtype=np.float64) / 255.0


def resolve_ordering(name: str, learned: Callable | None = None) -> Callable:
    """Ordering from a name: ``lex-rgb``, ``lex-gbr``, ``lex-brg``, ``borda``,
    ``learned`` (needs ``learned``) or ``learned:PATH`` (a model file)."""
    key = name.lower()
    if key in LEX_WEIGHTS:
        return LexMapping(key)
    if key == "borda":
        return BordaRule(lex_mappings())
    if key == "learned":
        if learned is None:
            raise ConfigError("ordering 'learned' needs a trained model; use learned:PATH")
        return learned
    if key.startswith("learned:"):
        params, _ = sco.load_model(name.split(":", 1)[1])
        return sco.MlpMapping(params)
    raise ConfigError(f"unknown ordering {name!r}; use lex-rgb, lex-gbr, lex-brg, borda or learned:PATH")


def rank_colors(method: Callable, colors) -> np.ndarray:
    """Distinct colors sorted ascending by the total order the method induces."""
    colors = np.asarray(colors, dtype=np.float64)
    if len(np.unique(colors, axis=0)) != len(colors):
        raise ValueError("rank_colors needs distinct colors")
    return build_rank_lut(method, colors[None, :, :]).colors


def color_ramp(method: Callable, colors) -> np.ndarray:
    """``1 x k`` image of the colors in ascending order."""
    return rank_colors(method, colors)[None, :, :]


def _parse_range(text) -> tuple[int, int]:
    if isinstance(text, (tuple, list)):
        return int(text[0]), int(text[1])
    a, sep, b = str(text).partition(":")
    if not sep:
        raise ConfigError(f"range {text!r} must look like START:STOP")
    try:
        return int(a), int(b)
    except ValueError:
        raise ConfigError(f"range {text!r} must look like START:STOP") from None


@dataclass
class ExperimentConfig:
    dataset: str = "data_batch_1.bin"
    train_range: tuple[int, int] = (0, 100)
    val_range: tuple[int, int] = (100, 200)
    output: str = "experiment-out"
    methods: tuple[str, ...] = METHODS
    se: str = "square:3"
    operators: tuple[str, ...] = ("open", "close")
    showcase: int = 5
    eval_images: int | None = None
    eval_operator: str = "open"
    alpha: float = 0.01
    max_colors: int = 4096
    soft: sco.SoftConfig = field(default_factory=sco.SoftConfig)

    def __post_init__(self):
        self.train_range = _parse_range(self.train_range)
        self.val_range = _parse_range(self.val_range)
        for lo, hi in (self.train_range, self.val_range):
            if lo < 0 or hi <= lo:
                raise ConfigError(f"empty or negative range {lo}:{hi}")
        (a, b), (c, d) = self.train_range, self.val_range
        if a < d and c < b:
            raise ConfigError(f"train range {a}:{b} and validation range {c}:{d} overlap")
        self.methods = tuple(self.methods)
        self.operators = tuple(self.operators)
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {METHODS}")
        StructuringElement.parse(self.se)
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")


_SOFT_KEYS = {f.name for f in fields(sco.SoftConfig)}


def load_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    """Read an INI file with ``[experiment]`` and ``[training]`` sections."""
    exp: dict = {}
    soft: dict = {}
    if path is not None:
        parser = configparser.ConfigParser()
        if not parser.read(path, encoding="utf-8"):
            raise ConfigError(f"cannot read config file {path}")
        if parser.has_section("experiment"):
            exp.update(parser["experiment"])
        if parser.has_section("training"):
            soft.update(parser["training"])
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        (soft if k in _SOFT_KEYS else exp)[k] = v
    unknown = set(soft) - _SOFT_KEYS
    if unknown:
        raise ConfigError(f"unknown training keys {sorted(unknown)}")
    defaults = sco.SoftConfig()
    try:
        soft_cfg = sco.SoftConfig(**{k: type(getattr(defaults, k))(v) for k, v in soft.items()})
        conv = {}
        for k, v in exp.items():
            if k in ("methods", "operators") and isinstance(v, str):
                conv[k] = tuple(t.strip() for t in v.split(",") if t.strip())
            elif k in ("showcase", "max_colors"):
                conv[k] = int(v)
            elif k == "eval_images":
                conv[k] = None if str(v).lower() in ("", "none", "all") else int(v)
            elif k == "alpha":
                conv[k] = float(v)
            else:
                conv[k] = v
        return ExperimentConfig(soft=soft_cfg, **conv)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _config_text(cfg: ExperimentConfig) -> str:
    parser = configparser.ConfigParser()
    d = asdict(cfg)
    soft = d.pop("soft")
    # the output location is not part of the result
    d.pop("output")
    parser["experiment"] = {
        k: (",".join(v) if isinstance(v, tuple) and k in ("methods", "operators") else
            f"{v[0]}:{v[1]}" if isinstance(v, tuple) else str(v))
        for k, v in d.items()
    }
    parser["training"] = {k: repr(v) if isinstance(v, float) else str(v) for k, v in soft.items()}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def run_experiment(cfg: ExperimentConfig, train_images=None, val_images=None) -> Path:
    """Run the full protocol and return the artifact directory.

    Images are read from ``cfg.dataset`` unless given directly. Artifacts
    are written to a scratch directory that replaces ``cfg.output`` only on
    success.
    """
    if train_images is None:
        train_images = load_cifar_batch(cfg.dataset, *cfg.train_range)
    if val_images is None:
        val_images = load_cifar_batch(cfg.dataset, *cfg.val_range)
    out = Path(cfg.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".partial-", dir=out.parent))
    try:
        _run(cfg, train_images, val_images, tmp)
        if out.exists():
            shutil.rmtree(out)
        tmp.rename(out)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return out


def _run(cfg: ExperimentConfig, train_images, val_images, out: Path) -> None:
    (out / "config.ini").write_text(_config_text(cfg), encoding="utf-8")
    H = lex_mappings()
    learned = None
    if "learned" in cfg.methods:
        logger.info("training on %d images", len(train_images))
        result = sco.train(train_images, val_images, H, cfg.soft)
        sco.save_model(out / "model.json", result.params, cfg.soft)
        sco.write_loss_csv(out / "loss.csv", result)
        learned = result.mapping
    orderings = {m: resolve_ordering(m, learned) for m in cfg.methods}
    se = StructuringElement.parse(cfg.se)

    showcase = out / "showcase"
    showcase.mkdir()
    for k, img in enumerate(train_images[: cfg.showcase]):
        write_image(showcase / f"img{k:03d}_original.ppm", img)
        for m, h in orderings.items():
            lut = build_rank_lut(h, img)
            for op in cfg.operators:
                res = apply_operator(op, img, h, se, lut=lut)
                write_image(showcase / f"img{k:03d}_{op}_{m}.ppm", res)

    names, colors = palette_colors()
    ramps = out / "ramps"
    ramps.mkdir()
    rows = ["method,position,color,r,g,b"]
    index = {tuple(c): n for n, c in zip(names, colors.tolist())}
    for m, h in orderings.items():
        ranked = rank_colors(h, colors)
        write_image(ramps / f"ramp_{m}.ppm", ranked[None, :, :])
        for pos, c in enumerate(ranked.tolist()):
            r, g, b = (int(round(v * 255)) for v in c)
            rows.append(f"{m},{pos},{index[tuple(c)]},{r},{g},{b}")
    (out / "ramps.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    evalset = val_images if cfg.eval_images is None else val_images[: cfg.eval_images]
    phi: dict[str, list[float]] = {m: [] for m in orderings}
    records = []
    for k, img in enumerate(evalset):
        for m, h in orderings.items():
            res = apply_operator(cfg.eval_operator, img, h, se)
            value = evaluation.global_irregularity(img, res, cfg.max_colors)
            phi[m].append(value)
            records.append((k, m, value))
    (out / "irregularity.csv").write_text(evaluation.phi_csv(records), encoding="utf-8")
    if len(evalset):
        (out / "irregularity_summary.csv").write_text(evaluation.summary_csv(phi), encoding="utf-8")
    if len(evalset) >= 10 and len(orderings) >= 2:
        tests = evaluation.pairwise_wilcoxon(phi, cfg.alpha)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method_a", "method_b", "statistic", "pvalue", "direction", "significant"])
        for t in tests:
            w.writerow([t.method_a, t.method_b, repr(t.statistic), repr(t.pvalue), t.direction, t.significant])
        (out / "wilcoxon.csv").write_text(buf.getvalue(), encoding="utf-8")
        (out / "hasse.dot").write_text(evaluation.hasse_from_tests(tests, list(orderings)), encoding="utf-8")
