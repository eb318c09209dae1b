"""Published reference values used by the acceptance and example tests.

Probabilities are in percent, rates in percent per year, times in years.
"""

# saving years -> [(ratio, implied return %, Pr(v > ratio) %)]
PENSION_TABLE = {
    25: [
        (3.11, 1.64, 65.40),
        (3.33, 2.15, 54.40),
        (3.55, 2.61, 45.17),
        (4.00, 3.60, 28.27),
        (4.44, 4.17, 16.16),
        (5.00, 4.98, 7.37),
        (5.83, 6.02, 1.72),
        (6.67, 6.90, 0.34),
    ],
    40: [
        (5.00, 1.05, 59.38),
        (6.50, 2.23, 54.51),
        (7.00, 2.55, 49.17),
        (7.50, 2.85, 41.77),
        (9.50, 3.83, 21.69),
        (11.00, 4.43, 14.86),
        (15.00, 5.65, 1.07),
    ],
}

# consumption ratio -> [(years, IRR %, survival %)]
SURVIVAL_TABLE = {
    7.5: [(8, 1.45, 48.73), (9, 3.81, 29.04), (10, 5.60, 20.46), (11, 6.99, 14.74)],
    10.0: [(10, 0.00, 79.78), (11, 1.62, 54.01), (12, 2.92, 31.12), (13, 3.97, 20.60),
           (14, 4.84, 14.75), (15, 5.55, 10.79)],
    12.0: [(13, 1.16, 70.79), (14, 2.12, 48.21), (15, 2.92, 29.22), (16, 3.60, 18.53),
           (17, 4.17, 12.70), (18, 4.66, 9.11)],
    12.5: [(13, 0.56, 82.36), (14, 1.54, 64.46), (15, 2.37, 42.61), (16, 3.06, 26.14),
           (17, 3.65, 16.68), (18, 4.15, 11.40), (19, 4.58, 8.12), (20, 4.96, 5.84)],
    15.0: [(15, 0.00, 93.17), (20, 2.91, 28.93), (25, 4.38, 3.48), (30, 5.21, 0.43)],
    16.25: [(20, 2.06, 60.94), (25, 3.63, 9.61), (30, 4.52, 1.08), (35, 5.06, 0.09)],
}

MFPT_TABLE = {7.5: 8.27, 10.0: 11.29, 12.0: 13.86, 12.5: 14.53, 15.0: 18.16, 16.25: 20.15}

# age -> {ratio: Pr(pension outlives the pensioner) %}
MORTALITY_TABLE = {
    67: {7.5: 19.18, 10.0: 28.65, 12.0: 54.70, 12.5: 60.29, 15.0: 67.43, 16.25: 72.62},
    72: {7.5: 28.18, 10.0: 40.93, 12.0: 60.70, 12.5: 65.39, 15.0: 78.13, 16.25: 87.78},
}

TRUNCATION_ERROR = 1.0805e-172

CONSTANTS = {"psi": 0.0329, "phi": 0.3464, "xi": -0.0328, "eta_squared": 1 / 6}

LIFE_TABLE_67 = {"l": 80123, "d": 1418, "q": 0.017699, "e": 16.9}
