"""Command-line pipeline: augment, synth-testset, features, eer, pca.

Exit codes: 0 success, 1 validation error, 2 I/O or data error. Commands
that produce a directory write into `<out-dir>.tmp` and rename at the
end, so a failed run leaves no partial outputs behind.

Seconds-valued flags are parsed as exact decimals and converted to
samples at each source file's rate; a value that does not land on a
whole sample is rejected.
"""

import argparse
import json
import os
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .audio import load_wav, save_wav
from .augment import METHOD_PAS, METHOD_TRADITIONAL, PasConfig, augment_utterance
from .errors import EmptyCatalogError, PasaugError
from .evaluation import eer_from_scores, read_scores, synth_testset
from .features import LMEL_MAGIC, MelConfig, log_mel, read_features, write_features
from .pca import EmbeddingSet, pca_project, write_projection

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

DEFAULTS = {
    "method": METHOD_PAS,
    "ln_sec": "3.2",
    "ls_min_sec": "1",
    "snr": "0:20",
    "mix_prob": 0.75,
    "jobs": 1,
    "skip_errors": False,
    "snr_grid": "0,5,10,15,20",
    "fft_size": 1024,
    "win_ms": "25",
    "hop_ms": "10",
    "n_mels": 80,
    "fmin": 20.0,
    "fmax": 7600.0,
    "log_floor": 1e-10,
    "k": 2,
}


class _ValidationError(Exception):
    pass


def _seconds_to_samples(text: str, rate: int, flag: str) -> int:
    try:
        seconds = Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise _ValidationError(f"{flag}: cannot parse {text!r} as a duration")
    count = seconds * rate
    if count.denominator != 1:
        raise _ValidationError(
            f"{flag}: {text} s is not a whole number of samples at {rate} Hz"
        )
    if count < 1:
        raise _ValidationError(f"{flag}: duration must cover at least one sample")
    return int(count)


def _ms_to_samples(text: str, rate: int, flag: str) -> int:
    try:
        ms = Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise _ValidationError(f"{flag}: cannot parse {text!r} as milliseconds")
    count = ms * rate / 1000
    if count.denominator != 1:
        raise _ValidationError(
            f"{flag}: {text} ms is not a whole number of samples at {rate} Hz"
        )
    if count < 1:
        raise _ValidationError(f"{flag}: window must cover at least one sample")
    return int(count)


def _parse_snr_range(text: str) -> tuple[float, float]:
    parts = str(text).split(":")
    if len(parts) != 2:
        raise _ValidationError(f"--snr expects MIN:MAX, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise _ValidationError(f"--snr expects numeric MIN:MAX, got {text!r}")
    return lo, hi


def _parse_snr_grid(text: str) -> list[float]:
    try:
        grid = [float(p) for p in str(text).split(",") if p.strip()]
    except ValueError:
        raise _ValidationError(f"--snr-grid expects comma-separated dB values, got {text!r}")
    if not grid:
        raise _ValidationError("--snr-grid is empty")
    return grid


def _read_manifest(path: Path) -> list[Path]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    paths = [Path(line.strip()) for line in lines if line.strip()]
    if not paths:
        raise EmptyCatalogError(f"manifest {path} lists no files")
    return paths


def _noise_paths(args) -> list[Path]:
    if getattr(args, "noise_manifest", None):
        return _read_manifest(Path(args.noise_manifest))
    if getattr(args, "noise_dir", None):
        paths = sorted(Path(args.noise_dir).rglob("*.wav"))
        if not paths:
            raise EmptyCatalogError(f"no .wav files under {args.noise_dir}")
        return paths
    raise _ValidationError("one of --noise-dir or --noise-manifest is required")


def _load_config_file(path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _resolve(args, key: str, file_cfg: dict):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in file_cfg:
        return file_cfg[key]
    return DEFAULTS.get(key)


def _resolve_seed(args, file_cfg: dict) -> int:
    for candidate in (getattr(args, "seed", None), file_cfg.get("seed"),
                      os.environ.get("PAS_SEED")):
        if candidate is not None:
            try:
                return int(candidate)
            except ValueError:
                raise _ValidationError(f"seed must be an integer, got {candidate!r}")
    return 0


class _StagedDir:
    """Write into `<out>.tmp`, rename to `<out>` only if everything succeeds."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.tmp_dir = self.out_dir.parent / (self.out_dir.name + ".tmp")

    def __enter__(self) -> Path:
        if self.out_dir.exists() and any(self.out_dir.iterdir()):
            raise _ValidationError(f"output directory {self.out_dir} is not empty")
        if self.tmp_dir.exists():
            shutil.rmtree(self.tmp_dir)
        self.tmp_dir.mkdir(parents=True)
        return self.tmp_dir

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            shutil.rmtree(self.tmp_dir, ignore_errors=True)
            return False
        if self.out_dir.exists():
            self.out_dir.rmdir()
        os.rename(self.tmp_dir, self.out_dir)
        return False


def _sidecar_record(input_path, noise_paths, method, sample, seed, index) -> dict:
    placement = sample.placement
    if placement is None:
        return {
            "input": str(input_path),
            "noise": None,
            "method": "none",
            "L_s": None,
            "P_s": None,
            "snr_db": None,
            "noise_gain": None,
            "noise_offset": None,
            "speech_offset": sample.crop_offset,
            "seed": seed,
            "index": index,
        }
    return {
        "input": str(input_path),
        "noise": str(noise_paths[placement.noise_id]),
        "method": method,
        "L_s": placement.speech_len,
        "P_s": placement.speech_pos,
        "snr_db": placement.snr_db,
        "noise_gain": placement.noise_gain,
        "noise_offset": placement.noise_offset,
        "speech_offset": placement.speech_offset,
        "seed": seed,
        "index": index,
    }


def _cmd_augment(args) -> int:
    file_cfg = _load_config_file(args.config) if args.config else {}
    method = str(_resolve(args, "method", file_cfg))
    if method not in (METHOD_PAS, METHOD_TRADITIONAL):
        raise _ValidationError(f"--method must be pas or traditional, got {method!r}")
    ln_sec = str(_resolve(args, "ln_sec", file_cfg))
    ls_min_sec = str(_resolve(args, "ls_min_sec", file_cfg))
    snr_min, snr_max = _parse_snr_range(_resolve(args, "snr", file_cfg))
    mix_prob = float(_resolve(args, "mix_prob", file_cfg))
    jobs = int(_resolve(args, "jobs", file_cfg))
    skip_errors = bool(args.skip_errors or file_cfg.get("skip_errors", False))
    seed = _resolve_seed(args, file_cfg)
    if snr_min > snr_max:
        raise _ValidationError(f"--snr: min ({snr_min}) must be <= max ({snr_max})")
    if not 0.0 <= mix_prob <= 1.0:
        raise _ValidationError(f"--mix-prob must be in [0, 1], got {mix_prob}")
    if not 0 <= seed < 2**64:
        raise _ValidationError(f"seed must fit in 64 unsigned bits, got {seed}")
    if jobs < 1:
        raise _ValidationError(f"--jobs must be >= 1, got {jobs}")

    input_paths = _read_manifest(Path(args.manifest))
    noise_paths = _noise_paths(args)
    noise_catalog = [load_wav(p) for p in noise_paths]

    with _StagedDir(Path(args.out_dir)) as staging:

        def one(index: int) -> dict:
            path = input_paths[index]
            try:
                speech = load_wav(path)
                cfg = PasConfig(
                    noise_len=_seconds_to_samples(
                        ln_sec, speech.sample_rate, "--ln-sec"
                    ),
                    speech_len_min=_seconds_to_samples(
                        ls_min_sec, speech.sample_rate, "--ls-min-sec"
                    ),
                    snr_min=snr_min,
                    snr_max=snr_max,
                    mix_probability=mix_prob,
                    master_seed=seed,
                )
                sample = augment_utterance(speech, noise_catalog, cfg, method, index)
            except (_ValidationError, ValueError):
                raise
            except (PasaugError, OSError) as exc:
                if not skip_errors:
                    raise
                return {
                    "input": str(path),
                    "error": f"{type(exc).__name__}: {exc}",
                    "seed": seed,
                    "index": index,
                }
            save_wav(sample.audio, staging / f"{path.stem}.pas.wav")
            return _sidecar_record(path, noise_paths, method, sample, seed, index)

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                records = list(pool.map(one, range(len(input_paths))))
        else:
            records = [one(i) for i in range(len(input_paths))]
        with open(staging / "sidecar.jsonl", "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record) + "\n")
    return EXIT_OK


def _cmd_synth_testset(args) -> int:
    file_cfg = _load_config_file(args.config) if args.config else {}
    grid = _parse_snr_grid(_resolve(args, "snr_grid", file_cfg))
    jobs = int(_resolve(args, "jobs", file_cfg))
    seed = _resolve_seed(args, file_cfg)
    clean_paths = _read_manifest(Path(args.manifest))
    noise_paths = _noise_paths(args)
    with _StagedDir(Path(args.out_dir)) as staging:
        synth_testset(clean_paths, noise_paths, grid, seed, staging, jobs=jobs)
    return EXIT_OK


def _cmd_features(args) -> int:
    file_cfg = _load_config_file(args.config) if args.config else {}
    fft_size = int(_resolve(args, "fft_size", file_cfg))
    win_ms = str(_resolve(args, "win_ms", file_cfg))
    hop_ms = str(_resolve(args, "hop_ms", file_cfg))
    n_mels = int(_resolve(args, "n_mels", file_cfg))
    fmin = float(_resolve(args, "fmin", file_cfg))
    fmax = float(_resolve(args, "fmax", file_cfg))
    log_floor = float(_resolve(args, "log_floor", file_cfg))
    input_paths = _read_manifest(Path(args.manifest))

    with _StagedDir(Path(args.out_dir)) as staging:
        for path in input_paths:
            buf = load_wav(path)
            cfg = MelConfig(
                sample_rate=buf.sample_rate,
                fft_size=fft_size,
                win_length=_ms_to_samples(win_ms, buf.sample_rate, "--win-ms"),
                hop_length=_ms_to_samples(hop_ms, buf.sample_rate, "--hop-ms"),
                n_mels=n_mels,
                fmin=fmin,
                fmax=fmax,
                log_floor=log_floor,
            )
            write_features(log_mel(buf, cfg), staging / f"{path.stem}.lmel")
    return EXIT_OK


def _cmd_eer(args) -> int:
    labels, scores = read_scores(Path(args.scores))
    result = eer_from_scores(labels, scores)
    print(f"EER={result.eer * 100.0:.6f} THR={result.threshold:.9g}")
    return EXIT_OK


def _load_embeddings(path: Path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == LMEL_MAGIC:
        return read_features(path).astype(np.float64)
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=np.float64))


def _cmd_pca(args) -> int:
    file_cfg = _load_config_file(args.config) if args.config else {}
    k = int(_resolve(args, "k", file_cfg))
    vectors = _load_embeddings(Path(args.embeddings))
    labels = [
        line.strip()
        for line in Path(args.labels).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    result = pca_project(EmbeddingSet(vectors, tuple(labels)), k)
    out = Path(args.out)
    tmp = out.parent / (out.name + ".tmp")
    write_projection(result.projection, labels, tmp)
    os.replace(tmp, out)
    fractions = " ".join(f"{v:.6f}" for v in result.explained_variance)
    print(f"explained_variance={fractions}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pasaug",
        description="Partial additive speech augmentation and evaluation pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    augment = sub.add_parser("augment", help="augment a manifest of utterances")
    augment.add_argument("--manifest", required=True, help="text file, one WAV path per line")
    augment.add_argument("--noise-dir", help="directory scanned recursively for noise WAVs")
    augment.add_argument("--noise-manifest", help="text file, one noise WAV path per line")
    augment.add_argument("--out-dir", required=True)
    augment.add_argument("--method", choices=[METHOD_PAS, METHOD_TRADITIONAL])
    augment.add_argument("--ln-sec", dest="ln_sec", help="output/noise duration in seconds")
    augment.add_argument("--ls-min-sec", dest="ls_min_sec", help="minimum speech duration in seconds")
    augment.add_argument("--snr", help="SNR range in dB as MIN:MAX")
    augment.add_argument("--mix-prob", dest="mix_prob", type=float, help="per-utterance mixing probability")
    augment.add_argument("--seed", help="master seed (fallback: PAS_SEED env var)")
    augment.add_argument("--jobs", type=int, help="worker count; output is identical for any value")
    augment.add_argument("--skip-errors", action="store_true", help="record per-file failures instead of aborting")
    augment.add_argument("--config", help="TOML file with defaults for any flag")

    synth = sub.add_parser("synth-testset", help="noisy test-set copies over an SNR grid")
    synth.add_argument("--manifest", required=True)
    synth.add_argument("--noise-dir")
    synth.add_argument("--noise-manifest")
    synth.add_argument("--snr-grid", dest="snr_grid", help="comma-separated dB values")
    synth.add_argument("--out-dir", required=True)
    synth.add_argument("--seed")
    synth.add_argument("--jobs", type=int)
    synth.add_argument("--config")

    feats = sub.add_parser("features", help="log-Mel feature matrices")
    feats.add_argument("--manifest", required=True)
    feats.add_argument("--out-dir", required=True)
    feats.add_argument("--fft-size", dest="fft_size", type=int)
    feats.add_argument("--win-ms", dest="win_ms")
    feats.add_argument("--hop-ms", dest="hop_ms")
    feats.add_argument("--n-mels", dest="n_mels", type=int)
    feats.add_argument("--fmin", type=float)
    feats.add_argument("--fmax", type=float)
    feats.add_argument("--log-floor", dest="log_floor", type=float)
    feats.add_argument("--config")

    eer = sub.add_parser("eer", help="equal error rate of a score file")
    eer.add_argument("--scores", required=True, help="text file, `label score` per line")

    pca = sub.add_parser("pca", help="project embeddings onto principal components")
    pca.add_argument("--embeddings", required=True, help="feature matrix file or CSV")
    pca.add_argument("--labels", required=True, help="text file, one label per line")
    pca.add_argument("--k", type=int)
    pca.add_argument("--out", required=True)
    pca.add_argument("--config")

    augment.set_defaults(func=_cmd_augment)
    synth.set_defaults(func=_cmd_synth_testset)
    feats.set_defaults(func=_cmd_features)
    eer.set_defaults(func=_cmd_eer)
    pca.set_defaults(func=_cmd_pca)
    return parser


def run(argv) -> int:
    """Dispatch one invocation; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if not exc.code else EXIT_VALIDATION
    try:
        return args.func(args)
    except (_ValidationError, ValueError, EmptyCatalogError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (PasaugError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
