from .exponents import predicted_exponent, predicted_exponents, predicts_convergence
from .growth import Classification, GrowthReport, classify_increments, growth_scan
from .integrate import AnnulusEstimate, integrate_annulus, panel_integral
from .lowerbounds import (lower_bound_rank1, lower_bound_typeD_rectangles,
                          rectangle_quadrature, typeD_rectangles)
from .scan import MinKResult, Verdict, make_verdict, min_k_scan

__all__ = [
    "AnnulusEstimate", "Classification", "GrowthReport", "MinKResult", "Verdict",
    "classify_increments", "growth_scan", "integrate_annulus", "lower_bound_rank1",
    "lower_bound_typeD_rectangles", "make_verdict", "min_k_scan", "panel_integral",
    "predicted_exponent", "predicted_exponents", "predicts_convergence",
    "rectangle_quadrature", "typeD_rectangles",
]
