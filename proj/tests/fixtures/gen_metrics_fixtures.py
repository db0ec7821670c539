#!/usr/bin/env python3
"""Regenerates metrics_fixtures.inc from exact rational arithmetic.

Each fixture is a confusion matrix (rows = truth, columns = prediction) plus the expected
accuracy, macro scores and per-class one-vs-rest scores. Run from this directory.
"""
from fractions import Fraction
import random


def ratio(num, den):
    return Fraction(0) if den == 0 else Fraction(num, den)


def expected(cm):
    n = len(cm)
    total = sum(map(sum, cm))
    per = []
    for c in range(n):
        tp = cm[c][c]
        fp = sum(cm[t][c] for t in range(n)) - tp
        fn = sum(cm[c]) - tp
        tn = total - tp - fp - fn
        p, r = ratio(tp, tp + fp), ratio(tp, tp + fn)
        f1 = 2 * p * r / (p + r) if p > 0 and r > 0 else Fraction(0)
        per.append((ratio(tp + tn, total), p, r, f1))
    acc = ratio(sum(cm[i][i] for i in range(n)), total)
    macro = [sum(row[i] for row in per) / n for i in (1, 2, 3)]
    return acc, macro, per


def fixed_cases():
    z5 = [[0] * 5 for _ in range(5)]
    perfect = [row[:] for row in z5]
    for i, v in enumerate([7, 3, 9, 1, 4]):
        perfect[i][i] = v
    all_wrong = [[0 if i == j else 1 for j in range(5)] for i in range(5)]
    one_row = [row[:] for row in z5]
    one_row[2][4] = 1
    absent = [[5, 1, 0, 0, 2], [2, 6, 0, 1, 0], [0, 0, 0, 0, 0], [1, 0, 0, 4, 1], [0, 2, 0, 0, 8]]
    never_predicted = [[3, 0, 1, 0, 0], [0, 0, 2, 1, 0], [1, 0, 5, 0, 0], [0, 0, 0, 6, 1], [0, 0, 1, 0, 2]]
    constant_pred = [[0, 0, 9, 0, 0], [0, 0, 4, 0, 0], [0, 0, 7, 0, 0], [0, 0, 2, 0, 0], [0, 0, 3, 0, 0]]
    return [
        ("binary_tp3_fp1_fn2_tn4", [[3, 2], [1, 4]]),
        ("truth_AAB_pred_ABB", [[1, 1], [0, 1]]),
        ("perfect_5", perfect),
        ("all_wrong_5", all_wrong),
        ("single_row", one_row),
        ("absent_class", absent),
        ("never_predicted_class", never_predicted),
        ("constant_prediction", constant_pred),
        ("three_class", [[10, 2, 3], [0, 7, 1], [4, 4, 4]]),
        ("binary_no_positive_predictions", [[0, 5], [0, 5]]),
    ]


def random_cases(rng, count):
    out = []
    for i in range(count):
        n = rng.choice([2, 3, 4, 5, 5, 5])
        sparse = rng.random() < 0.3
        cm = [[(0 if sparse and rng.random() < 0.5 else rng.randint(0, 30)) for _ in range(n)] for _ in range(n)]
        if sum(map(sum, cm)) == 0:
            cm[0][0] = 1
        out.append((f"random_{i:02d}", cm))
    return out


def fmt(x):
    return repr(float(x))


def main():
    rng = random.Random(20240229)
    cases = fixed_cases()
    cases += random_cases(rng, 50 - len(cases))
    lines = ["// Generated by gen_metrics_fixtures.py from exact rational arithmetic; do not edit.", ""]
    for name, cm in cases:
        acc, macro, per = expected(cm)
        counts = ", ".join(str(v) for row in cm for v in row)
        per_txt = ", ".join("{" + ", ".join(fmt(v) for v in row) + "}" for row in per)
        lines.append(f'{{"{name}", {len(cm)}, {{{counts}}}, {fmt(acc)}, {fmt(macro[0])}, {fmt(macro[1])}, '
                     f'{fmt(macro[2])}, {{{per_txt}}}}},')
    with open("metrics_fixtures.inc", "w") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
