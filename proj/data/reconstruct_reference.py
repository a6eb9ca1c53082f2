"""Rebuild data/swine_reference.instance from prior feed-table values.

Prior coefficients are typical Spanish feed-table values for the 17
ingredients (as-fed basis).  A weighted minimum-change correction is
applied per coefficient column so that the five published diets in
REFERENCE_DIETS reproduce their published nutrient profiles; the
correction is regularised so that residuals stay within the rounding
of the published two-decimal values.

Run:  python3 data/reconstruct_reference.py > data/swine_reference.instance
"""
import numpy as np

INGREDIENTS = [
    # name,            cost, lys,  DE,   max,  CF,   Ca,   DM,   CP,   P,    MC,   Trp,  Thr,  avP
    ("barley",         120., 0.39, 12.9, 0.40, 4.6,  0.06, 90.1, 11.3, 0.36, 0.40, 0.13, 0.36, 0.11),
    ("wheat",          130., 0.32, 14.1, 0.40, 2.6,  0.05, 89.5, 11.5, 0.33, 0.44, 0.14, 0.33, 0.15),
    ("corn",           135., 0.24, 14.3, 0.40, 2.2,  0.02, 86.3, 7.7,  0.25, 0.35, 0.06, 0.28, 0.06),
    ("alfalfa",        120., 0.70, 7.5,  0.05, 25.0, 1.50, 90.5, 16.5, 0.25, 0.45, 0.25, 0.65, 0.17),
    ("cassava_meal",   115., 0.09, 13.3, 0.10, 4.5,  0.20, 88.5, 2.5,  0.09, 0.06, 0.02, 0.08, 0.03),
    ("soybean_meal",   230., 2.70, 14.5, 0.30, 6.5,  0.30, 88.0, 44.0, 0.62, 1.28, 0.58, 1.73, 0.23),
    ("fish_meal",      550., 4.80, 15.0, 0.05, 0.5,  4.00, 92.0, 65.0, 2.60, 2.40, 0.70, 2.70, 2.20),
    ("gluten_feed",    110., 0.60, 11.5, 0.10, 7.8,  0.15, 89.0, 20.0, 0.85, 0.80, 0.10, 0.70, 0.25),
    ("calcium_carbonate", 30., 0.0, 0.0, 0.05, 0.0,  37.5, 99.0, 0.0,  0.0,  0.0,  0.0,  0.0,  0.0),
    ("lysine_78",     1800., 78.0, 17.5, 0.005, 0.0, 0.0,  98.0, 95.0, 0.0,  0.0,  0.0,  0.0,  0.0),
    ("sunflower_meal", 120., 1.05, 9.5,  0.10, 22.0, 0.35, 90.0, 30.0, 1.00, 1.20, 0.38, 1.05, 0.15),
    ("animal_fat",     420., 0.0,  33.0, 0.05, 0.0,  0.0,  99.0, 0.0,  0.0,  0.0,  0.0,  0.0,  0.0),
    ("beet_pulp",      120., 0.50, 11.3, 0.05, 18.0, 0.90, 89.0, 9.0,  0.09, 0.30, 0.09, 0.35, 0.03),
    ("lupin",          170., 1.50, 14.0, 0.10, 14.0, 0.25, 90.0, 32.0, 0.40, 0.70, 0.25, 1.10, 0.12),
    ("peas",           155., 1.50, 14.2, 0.20, 5.5,  0.10, 87.0, 21.0, 0.42, 0.50, 0.19, 0.78, 0.18),
    ("rye",            110., 0.36, 13.4, 0.20, 2.3,  0.06, 88.0, 9.0,  0.33, 0.35, 0.10, 0.30, 0.12),
    ("dicalcium_phosphate", 300., 0.0, 0.0, 0.03, 0.0, 22.0, 97.0, 0.0, 18.0, 0.0, 0.0,  0.0,  15.0),
]
COLUMNS = ["cost", "lysine", "energy", "max_proportion", "crude_fibre", "calcium",
           "dry_matter", "crude_protein", "phosphorus", "met_cys", "tryptophan",
           "threonine", "available_phosphorus"]
NUTRIENTS = COLUMNS[4:]

# Ingredient percentages of the published diets (same ingredient order).
REFERENCE_DIETS = np.array([
    [13.53, 22.25, 0.00, 0.00, 0.00, 15.08, 0.00, 3.74, 0.94, 0.00, 0.00, 0.00, 0.00, 10.00, 14.06, 20.00, 0.40],
    [11.38, 20.53, 2.12, 0.40, 0.42, 16.46, 0.08, 7.37, 3.49, 0.03, 0.74, 0.48, 0.78, 8.75, 10.27, 16.64, 0.17],
    [12.44, 25.17, 1.43, 0.33, 0.27, 16.40, 0.41, 6.27, 3.99, 0.12, 2.40, 0.62, 1.04, 6.93, 4.32, 18.14, 0.14],
    [10.80, 22.44, 7.36, 0.23, 0.14, 17.37, 0.06, 4.31, 3.25, 0.12, 2.72, 0.42, 0.62, 5.59, 7.74, 15.97, 0.28],
    [12.42, 25.15, 5.05, 0.67, 1.52, 16.45, 0.42, 4.99, 3.57, 0.12, 1.83, 0.23, 0.71, 6.04, 5.76, 14.93, 0.14],
]).T / 100.0
# Published profiles: cost, lysine, energy, then the nine nutrients.
REFERENCE_PROFILES = np.array([
    [151.4, 1.02, 14.31, 5.09, 0.60, 89.15, 19.33, 0.48, 0.60, 0.21, 0.70, 0.16],
    [149.2, 1.03, 14.45, 5.32, 1.53, 88.95, 19.30, 0.45, 0.61, 0.21, 0.70, 0.16],
    [149.91, 1.02, 14.35, 5.21, 1.72, 89.35, 18.78, 0.45, 0.62, 0.21, 0.67, 0.17],
    [150.23, 1.05, 14.35, 5.02, 1.46, 88.27, 18.74, 0.46, 0.61, 0.21, 0.67, 0.15],
    [149.43, 1.03, 14.32, 5.06, 1.56, 89.14, 18.48, 0.44, 0.60, 0.21, 0.66, 0.16],
])
# Fit tolerance per profile entry: relative for objectives, absolute for
# nutrients.
OBJECTIVE_REL_TOL = 0.0025
NUTRIENT_ABS_TOL = 0.02

BOUNDS = {
    "crude_fibre": (3.0, 5.5),
    "calcium": (0.55, 1.80),
    "dry_matter": (87.5, 90.0),
    "crude_protein": (18.0, 20.0),
    "phosphorus": (0.42, 0.70),
    "met_cys": (0.58, 0.80),
    "tryptophan": (0.20, 0.30),
    "threonine": (0.64, 0.85),
    "available_phosphorus": (0.14, 0.30),
}


def corrected(v0, targets, tol):
    # Bounded ridge fit: minimise sum((dv/w)^2) + sum(((X^T v - t)/tol)^2)
    # subject to v >= 0; zero prior entries stay fixed at zero.
    from scipy.optimize import lsq_linear
    X = REFERENCE_DIETS
    w = np.where(v0 == 0.0, 1e-9, np.maximum(np.abs(v0), 0.05 * np.max(np.abs(v0))))
    M = np.vstack([np.diag(1.0 / w), X.T / tol[:, None]])
    rhs = np.concatenate([v0 / w, targets / tol])
    return lsq_linear(M, rhs, bounds=(0.0, np.inf), lsmr_tol="auto").x


def main():
    table = np.array([row[1:] for row in INGREDIENTS])
    cols = {name: table[:, i].copy() for i, name in enumerate(COLUMNS)}
    profile_cols = ["cost", "lysine", "energy"] + NUTRIENTS
    for k, name in enumerate(profile_cols):
        if k < 3:
            # objectives first absorb a global unit/price-level factor
            pred = REFERENCE_DIETS.T @ cols[name]
            cols[name] = cols[name] * (pred @ REFERENCE_PROFILES[:, k]) / (pred @ pred)
        tol = (OBJECTIVE_REL_TOL * REFERENCE_PROFILES[:, k] if k < 3
               else np.full(5, NUTRIENT_ABS_TOL))
        v = corrected(cols[name], REFERENCE_PROFILES[:, k], tol)
        cols[name] = np.where(np.abs(v) < 1e-12, 0.0, v)
    print("# Grower-pig diet instance: 17 ingredients, three objectives")
    print("# (cost EUR/t, lysine %, digestible energy MJ/kg) and nine nutrient")
    print("# constraints.  Generated by data/reconstruct_reference.py.")
    print()
    print("[ingredients]")
    print(", ".join(["name"] + COLUMNS))
    for i, row in enumerate(INGREDIENTS):
        vals = [f"{cols[c][i]:.6g}" for c in COLUMNS]
        print(", ".join([row[0]] + vals))
    print()
    print("[nutrients]")
    print("name, lower, upper")
    for n in NUTRIENTS:
        lo, hi = BOUNDS[n]
        print(f"{n}, {lo}, {hi}")
    print()
    print("[noise]")
    print("0, 0, 0")
    print()
    print("[reference_solution]")
    print("name, proportion")
    for i, row in enumerate(INGREDIENTS):
        print(f"{row[0]}, {REFERENCE_DIETS[i, 0]:.4f}")
    print()
    print("[reference_profile]")
    print("name, value")
    for k, name in enumerate(profile_cols):
        print(f"{name}, {REFERENCE_PROFILES[0, k]}")

    # self-check, written to stderr
    import sys
    X = REFERENCE_DIETS
    for k, name in enumerate(profile_cols):
        got = X.T @ np.array([float(f"{c:.6g}") for c in cols[name]])
        print(name, np.round(got, 4), REFERENCE_PROFILES[:, k], file=sys.stderr)
        if name in BOUNDS:
            lo, hi = BOUNDS[name]
            assert np.all(got >= lo) and np.all(got <= hi), name
    for name in COLUMNS:
        if name != "max_proportion":
            print("prior->final", name, np.round(table[:, COLUMNS.index(name)], 3),
                  np.round(cols[name], 3), file=sys.stderr)


if __name__ == "__main__":
    main()
