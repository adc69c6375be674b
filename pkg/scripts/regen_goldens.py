"""Regenerate the golden files shipped in src/sicqb/data.

Run through ``make goldens``; never edit the outputs by hand.
"""
from __future__ import annotations

import contextlib
import io
import math
import os
from pathlib import Path

from sicqb import qbist
from sicqb.cli import main as cli_main
from sicqb.formats import ARTIFACT_VERSION, dumps, mixture_document, read_fiducial
from sicqb.hilbert import random_density
from sicqb.sic import SicPovm

DATA = Path(__file__).resolve().parents[1] / "src" / "sicqb" / "data"

# Seeds for which the default search budget converges; see README.
SEARCH_SEEDS = {2: 1, 3: 1, 4: 1, 5: 1, 6: 1, 7: 1, 8: 1}

SEPARATION_TRIALS = 10_000
SEPARATION_SEED = 2024
SEPARATION_SIGMAS = 5.0


def fiducials():
    cwd = os.getcwd()
    os.chdir(DATA)
    try:
        for d, seed in SEARCH_SEEDS.items():
            with contextlib.redirect_stdout(io.StringIO()):
                code = cli_main(["search", "--d", str(d), "--seed", str(seed),
                                 "--out", f"fiducial_d{d}.json"])
            if code != 0:
                raise SystemExit(f"search for d={d} with seed {seed} did not converge")
            print(f"fiducial_d{d}.json")
    finally:
        os.chdir(cwd)


def mixtures():
    qubit = mixture_document(
        [0.25, 0.75],
        [random_density(2, seed=11).matrix, random_density(2, rank=1, seed=12).matrix],
        {"artifact_version": ARTIFACT_VERSION,
         "provenance": "random_density(2, seed=11); random_density(2, rank=1, seed=12)"},
    )
    qutrit = mixture_document(
        [0.2, 0.3, 0.5],
        [random_density(3, seed=21).matrix,
         random_density(3, rank=2, seed=22).matrix,
         random_density(3, rank=1, seed=23).matrix],
        {"artifact_version": ARTIFACT_VERSION,
         "provenance": "random_density(3, seed=21); random_density(3, rank=2, seed=22); "
                       "random_density(3, rank=1, seed=23)"},
    )
    (DATA / "mixture_qubit.json").write_text(dumps(qubit), encoding="utf-8")
    (DATA / "mixture_qutrit.json").write_text(dumps(qutrit), encoding="utf-8")
    print("mixture_qubit.json\nmixture_qutrit.json")


def separation():
    """Pin the classical-vs-Born gap threshold for qubit pure states.

    Oracle: for d = 2 the gap is |2U - 1|/3 with U uniform, mean 1/6 and
    variance 1/108.  The threshold is the oracle mean minus five standard
    errors of a SEPARATION_TRIALS-sample mean.
    """
    sic = SicPovm.from_fiducial(read_fiducial(DATA / "fiducial_d2.json"))
    oracle_mean = qbist.expected_pure_gap_qubit()
    sigma = math.sqrt(1.0 / 108.0)
    threshold = oracle_mean - SEPARATION_SIGMAS * sigma / math.sqrt(SEPARATION_TRIALS)
    measured = qbist.mean_gap(sic, SEPARATION_TRIALS, SEPARATION_SEED)
    doc = {
        "artifact_version": ARTIFACT_VERSION,
        "d": 2,
        "state_class": "haar_pure",
        "trials": SEPARATION_TRIALS,
        "seed": SEPARATION_SEED,
        "oracle_mean_max_abs_gap": oracle_mean,
        "oracle_std_max_abs_gap": sigma,
        "threshold": threshold,
        "measured_mean_max_abs_gap": measured,
    }
    (DATA / "separation_d2.json").write_text(dumps(doc), encoding="utf-8")
    print(f"separation_d2.json (measured {measured:.6f}, threshold {threshold:.6f})")


if __name__ == "__main__":
    DATA.mkdir(parents=True, exist_ok=True)
    fiducials()
    mixtures()
    separation()
