#!/usr/bin/env python3
"""Export the public datasets bundled with scikit-learn and statsmodels to CSV.

The CSV files under data/ are committed; this script only documents how they
were produced and regenerates them byte-for-byte.
"""
import argparse
import pathlib

import statsmodels.api as sm
from sklearn.datasets import load_breast_cancer


def export_breast_cancer(out: pathlib.Path) -> None:
    bunch = load_breast_cancer(as_frame=True)
    frame = bunch.frame.copy()
    frame.columns = [c.replace(" ", "_") for c in frame.columns]
    # sklearn encodes malignant=0, benign=1
    frame.to_csv(out / "breast_cancer.csv", index=False, float_format="%.10g")


def export_anes96(out: pathlib.Path) -> None:
    frame = sm.datasets.anes96.load_pandas().data.copy()
    frame = frame.drop(columns=["logpopul"])
    frame["vote"] = frame["vote"].astype(int)
    frame.to_csv(out / "anes96.csv", index=False, float_format="%.10g")


def export_fair(out: pathlib.Path) -> None:
    frame = sm.datasets.fair.load_pandas().data.copy()
    frame["had_affair"] = (frame["affairs"] > 0).astype(int)
    frame = frame.drop(columns=["affairs"])
    frame.to_csv(out / "fair.csv", index=False, float_format="%.10g")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=pathlib.Path(__file__).resolve().parent.parent / "data",
                        type=pathlib.Path)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    export_breast_cancer(args.out)
    export_anes96(args.out)
    export_fair(args.out)


if __name__ == "__main__":
    main()
