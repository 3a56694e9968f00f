"""Pure-numpy reference versions of the compiled stencils."""
import numpy as np


def laplacian(phi, h):
    """Positive flat Laplacian ``-sum_a D_a^+ D_a^- phi`` with periodic wrap."""
    phi = np.asarray(phi, dtype=np.float64)
    acc = 8.0 * phi
    for axis in range(4):
        acc = acc - np.roll(phi, -1, axis) - np.roll(phi, 1, axis)
    return acc / (h * h)


def div_grad(phi, coef, h):
    """Conservative ``-div(coef grad phi)`` with arithmetic face averages of ``coef``."""
    phi = np.asarray(phi, dtype=np.float64)
    coef = np.asarray(coef, dtype=np.float64)
    acc = np.zeros_like(phi)
    for axis in range(4):
        p_up = np.roll(phi, -1, axis)
        p_dn = np.roll(phi, 1, axis)
        c_up = 0.5 * (coef + np.roll(coef, -1, axis))
        c_dn = 0.5 * (np.roll(coef, 1, axis) + coef)
        acc = acc - c_up * (p_up - phi) + c_dn * (phi - p_dn)
    return acc / (h * h)
