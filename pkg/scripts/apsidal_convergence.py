#!/usr/bin/env python3
"""Tabulate the apsidal angle of near-circular launches against its closed-form
limit pi/sqrt(2 - alpha), shrinking the launch offset by decades.

Usage: python scripts/apsidal_convergence.py
"""

from symorbit import PowerLawParams, apsidal_angle, apsidal_limit, radial_problem_from_launch


def main():
    print(f"{'alpha':>6} {'eps':>8} {'Phi':>16} {'limit':>16} {'|error|':>10}")
    for alpha in (0.0, 0.5, 1.0, 1.5):
        params = PowerLawParams(kappa=1.0, alpha=alpha)
        limit = apsidal_limit(params, 1.0)
        for eps in (1e-1, 1e-2, 1e-3, 1e-4):
            problem = radial_problem_from_launch(params, 1.0, 1.0 + eps)
            phi = apsidal_angle(problem)
            print(
                f"{alpha:6.2f} {eps:8.0e} {phi:16.12f} {limit:16.12f} "
                f"{abs(phi - limit):10.2e}"
            )
        print()
    print("alpha = 2 has no bounded oscillation: the limit denominator vanishes")
    print("(equivalently pi/sqrt(2 - alpha) diverges), so no row is printed.")


if __name__ == "__main__":
    main()
