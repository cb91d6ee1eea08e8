"""Print how the headline numbers move with the peak-search settings.

    python scripts/sensitivity.py
"""

from lrspin import ChainSpec
from lrspin.experiments import analyze_chain

SETTINGS = [
    # (window_factor, coarse_steps, threshold, floor)
    (3.5, 20000, 0.98, 0.5),
    (3.5, 20000, 0.95, 0.5),
    (3.5, 20000, 0.99, 0.5),
    (3.5, 20000, 0.98, 0.0),
    (3.5, 20000, 0.98, 0.98),
    (3.5, 50000, 0.98, 0.5),
    (3.0, 20000, 0.98, 0.5),
    (4.0, 20000, 0.98, 0.5),
]


def main():
    print("| window | steps | threshold | floor | F_c(50) | F_dh(50) | t_c/t_dh(50) | ratio_dh(100) | ratio_c(100) |")
    print("|---|---|---|---|---|---|---|---|---|")
    for w, steps, thr, floor in SETTINGS:
        opts = dict(window_factor=w, coarse_steps=steps, threshold=thr, floor=floor)
        c50 = analyze_chain(ChainSpec(50, 3.0), **opts)
        d50 = analyze_chain(ChainSpec.double_hole(50, 3.0), **opts)
        c100 = analyze_chain(ChainSpec(100, 3.0), **opts)
        d100 = analyze_chain(ChainSpec.double_hole(100, 3.0), **opts)
        print(
            f"| {w} | {steps} | {thr} | {floor} | {c50.fidelity_max:.4f} | {d50.fidelity_max:.4f} | "
            f"{c50.t_measured / d50.t_measured:.3f} | {d100.ratio:.4f} | {c100.ratio:.4f} |"
        )


if __name__ == "__main__":
    main()
