"""Parameter sets of the standard result tables (inputs only, no results)."""

PENSION_RATIOS = {
    25: (3.11, 3.33, 3.55, 4.00, 4.44, 5.00, 5.83, 6.67),
    40: (5.00, 6.50, 7.00, 7.50, 9.50, 11.00, 15.00),
}

SURVIVAL_YEARS = {
    7.5: (8, 9, 10, 11),
    10.0: (10, 11, 12, 13, 14, 15),
    12.0: (13, 14, 15, 16, 17, 18),
    12.5: (13, 14, 15, 16, 17, 18, 19, 20),
    15.0: (15, 20, 25, 30),
    16.25: (20, 25, 30, 35),
}

CONSUMPTION_RATIOS = (7.5, 10.0, 12.0, 12.5, 15.0, 16.25)

MORTALITY_AGES = (67, 72)

CONTRIBUTION = 0.1
