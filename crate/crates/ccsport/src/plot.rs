//! Plot script generation. The script is plain Python with matplotlib and
//! reads the CSVs of the result tree it sits in.

use std::fmt::Write as _;

use crate::config::ExperimentSpec;

/// A script that draws, per instance, the first run's archive of every
/// algorithm against the reference front, saving `<instance>.png` next to
/// itself.
pub fn script(spec: &ExperimentSpec) -> String {
    let mut s = String::from(
        r#"#!/usr/bin/env python3
# Generated by ccsport. Run from anywhere: paths are relative to this file.
import csv
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

ROOT = pathlib.Path(__file__).resolve().parent.parent


def read(path, x, y):
    with open(path) as f:
        next(f)  # header comment
        rows = list(csv.DictReader(f))
    return [float(r[x]) for r in rows], [float(r[y]) for r in rows]


"#,
    );
    let _ = writeln!(s, "INSTANCES = [");
    for i in &spec.instances {
        let _ = writeln!(s, "    {:?},", i.name);
    }
    let _ = writeln!(s, "]\nALGORITHMS = [");
    for a in &spec.algorithms {
        let _ = writeln!(s, "    ({:?}, {:?}),", a.slug(), a.display());
    }
    s.push_str(
        r#"]

for inst in INSTANCES:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ref = ROOT / "reference" / f"{inst}.csv"
    if ref.exists():
        x, y = read(ref, "risk", "return")
        ax.plot(x, y, color="black", linewidth=1, label="reference")
    for slug, label in ALGORITHMS:
        front = ROOT / "fronts" / inst / slug / "run-01.csv"
        if front.exists():
            x, y = read(front, "risk", "return")
            ax.scatter(x, y, s=8, label=label)
    ax.set_xlabel("risk (variance)")
    ax.set_ylabel("return")
    ax.set_title(inst)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(pathlib.Path(__file__).resolve().parent / f"{inst}.png", dpi=150)
    plt.close(fig)
"#,
    );
    s
}
