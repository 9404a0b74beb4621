"""Plot scripts over the run artifacts.

Emits plain gnuplot scripts next to the CSVs they read, so the figures
can be rendered later without this package: comfort bars per condition,
learning-error curves, the belief-divergence trajectory with rare
transitions marked, and original-vs-shuffled AUC bars.
"""

from __future__ import annotations

from pathlib import Path

# CSV column numbers (1-based, gnuplot convention) in the trial files.
COL_ITERATION = 3
COL_ROUND = 4
COL_RARE = 14
COL_JSD = 16
COL_KLD_A = 17
COL_KLD_B = 18

_PREAMBLE = """\
# gnuplot script; run from this directory: gnuplot {name}
set datafile separator ","
set terminal pngcairo size 900,600
set output "{output}"
set key outside top
"""


def _write(path: Path, text: str):
    path.write_text(text)


def emit_plots(run_dir, config, summary) -> list:
    """Write the four standard plot scripts into <run_dir>/plots.

    Returns the artifact paths relative to the run directory. Scripts that
    need data the run did not produce (AUC needs the full alignment
    window) are skipped.
    """
    run_dir = Path(run_dir)
    plots = run_dir / "plots"
    plots.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    def emit(name: str, body: str):
        _write(plots / name, _PREAMBLE.format(name=name, output=name[:-3] + ".png") + body)
        written.append(f"plots/{name}")

    emit(
        "cnorm_bars.gp",
        """\
set title "Mean comfort of the true state per condition"
set style fill solid 0.6 border -1
set boxwidth 0.6
set yrange [0:1]
set ylabel "mean c_norm"
plot "../summary_cnorm.csv" skip 1 using 0:2:3:xtic(1) with boxerrorbars title "mean +/- sd"
""",
    )

    lead = config.conditions[0]
    curve_cond = "mhng" if "mhng" in config.conditions else lead
    emit(
        "kld_curves.gp",
        f"""\
set title "Learning error of the imprecise matrices ({curve_cond})"
set xlabel "iteration"
set ylabel "mean KL (nats)"
plot "../curves_{curve_cond}.csv" skip 1 using 1:4 with lines lw 2 title "sensory map (parent)", \\
     "../curves_{curve_cond}.csv" skip 1 using 1:5 with lines lw 2 title "dynamics, Sleep slice (infant)"
""",
    )

    trial_rel = f"../trials/{curve_cond}_t00.csv"
    emit(
        "jsd_trajectory.gp",
        f"""\
set title "Belief divergence between the agents ({curve_cond}, trial 0)"
set xlabel "iteration"
set ylabel "JSD (nats)"
# Second-round rows carry the per-iteration value; rare-branch rows get a marker.
plot "{trial_rel}" skip 1 using (${COL_ROUND}==2?${COL_ITERATION}:1/0):{COL_JSD} with lines lw 1 title "JSD", \\
     "{trial_rel}" skip 1 using (${COL_ROUND}==2&&${COL_RARE}==1?${COL_ITERATION}:1/0):{COL_JSD} with points pt 7 ps 1.2 title "rare transition"
""",
    )

    has_auc = any(
        "auc_original" in row
        for cond in config.conditions
        for row in summary["conditions"][cond]["trials"]
    )
    if has_auc:
        emit(
            "auc_bars.gp",
            f"""\
set title "Divergence AUC, original vs time-shuffled ({curve_cond})"
set style data histogram
set style histogram clustered gap 1
set style fill solid 0.6 border -1
set xlabel "trial"
set ylabel "AUC of JSD, alignment window"
plot "< grep '^{curve_cond},' ../summary_auc.csv" using 3:xtic(2) title "original", \\
     "" using 4 title "shuffled"
""",
        )

    return written
