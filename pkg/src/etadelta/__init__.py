"""Exact q-series machinery for weakly holomorphic modular forms on
Gamma_0(9) and the p-adic limit constants attached to the weight-4 CM
newform eta(3 tau)^8."""

from .exactnum import PadicApprox, padic_valuation_of_difference
from .qseries import LaurentSeries, ModDomain, OperatorContext, RATIONAL
from .etaforms import EtaQuotient, build_basis, eta_expansion, level9_catalog
from .cohomology import construct_representative, pairing, reduce_canonical
from .padiclimit import delta_approximants, even_power_vanishing_check

__version__ = "0.1.0"
