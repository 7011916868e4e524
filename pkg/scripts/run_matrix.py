"""Run the raw-versus-federated experiment matrix and print the comparison table.

Usage::

    python scripts/run_matrix.py [--data-dir fixtures] [--seed 42] [--json out.json]

Without ``--data-dir`` the synthetic fixtures shipped in ``fixtures/`` are
used. Pass a directory holding the four public CSV files to run on them.
"""

import argparse
import sys
import time
from pathlib import Path

from svcfl.dataset import default_paths
from svcfl.dataset.ingest import load_sources, prepare_silos
from svcfl.evaluation import ExperimentOptions, default_cells, render_json, render_table, run_experiment_matrix
from svcfl.evaluation.experiment import RAW_SITES

ROOT = Path(__file__).resolve().parent.parent


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data-dir", default=str(ROOT / "fixtures"))
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--n-rounds", type=int, default=10)
    ap.add_argument("--local-epochs", type=int, default=20)
    ap.add_argument("--json", help="also write the JSON report here")
    args = ap.parse_args(argv)

    paths = {sid: str(p) for sid, p in default_paths(args.data_dir).items()}
    prepared = prepare_silos(load_sources(paths))
    opts = ExperimentOptions(seed=args.seed, n_rounds=args.n_rounds, local_epochs=args.local_epochs)
    start = time.perf_counter()
    reports = run_experiment_matrix(prepared.silos, default_cells(), opts)
    elapsed = time.perf_counter() - start

    sys.stdout.write(render_table(reports))
    print(f"\n{len(reports)} cells in {elapsed:.1f} s on {sum(len(d) for d in prepared.silos)} records")
    for kind in ("svc", "dt", "rf"):
        raw = min(r.accuracy for r in reports if r.classifier_kind == kind and r.site in RAW_SITES)
        fed = max(r.accuracy for r in reports if r.classifier_kind == kind and r.condition in ("fedavg", "meta-vote"))
        print(f"{kind}: worst raw {raw:.3f}  best federated {fed:.3f}  gap {100 * (fed - raw):+.1f} pp")
    if args.json:
        Path(args.json).write_bytes(render_json(reports))


if __name__ == "__main__":
    main()
