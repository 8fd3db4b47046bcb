"""Contour-background surfaces, keyed by potential name.

Read-only copies of the 2-D benchmark formulas (value only); duplicated here
so the plotting package needs nothing beyond the CSV interface.
"""

import numpy as np


def _osc(x1, x2):
    g = 5.0 * x1 ** 2 * np.exp(-(x1 ** 2) / 9.0)
    return g * np.cos(x1 + 2.0 * x2) * np.cos(2.0 * x1 - x2) / (1.0 + x2 ** 2 / 9.0)


def bivar(x1, x2):
    return (x1 ** 2 / 5.0 + x2 ** 2 / 10.0 + 5.0 * np.exp(-(x1 ** 2))
            - 7.0 * np.exp(-((x1 + 5.0) ** 2) - (x2 - 3.0) ** 2)
            - 6.0 * np.exp(-((x1 - 5.0) ** 2) - (x2 + 2.0) ** 2)
            + _osc(x1, x2))


def u2(x1, x2):
    return (x1 ** 2 / 7.0 + x2 ** 2 / 7.0
            + 5.0 * (1.0 - np.exp(-9.0 * x2 ** 2)) * np.exp(-(x1 ** 2))
            - 7.0 * np.exp(-((x1 + 5.0) ** 2) - (x2 - 3.0) ** 2)
            - 6.0 * np.exp(-((x1 - 5.0) ** 2) - (x2 + 2.0) ** 2)
            + _osc(x1, x2))


def u3(x1, x2):
    return (x1 ** 2 / 5.0 + x2 ** 2 / 10.0 + 5.0 * np.exp(-(x1 ** 2))
            - 7.0 * np.exp(-2.0 * (x1 + 5.0) ** 2 - (x2 - 3.0) ** 2 / 5.0)
            - 6.0 * np.exp(-((x1 - 5.0) ** 2) / 5.0 - 2.0 * (x2 + 2.0) ** 2))


SURFACES = {"bivar": bivar, "u2": u2, "u3": u3}
