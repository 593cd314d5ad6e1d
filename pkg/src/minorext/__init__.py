"""Extreme eigenvalues of principal minors of random Gram and Wigner matrices."""

from .distributions import EntryDistribution, SeedSpec, eta_of, parse_distribution, sample_entries
from .eigen_small import SpectralSummary, eigs_closed_form, spectral_norm, sym_eigs
from .matgen import DataMatrix, SymMatrix, center_scale, gen_data, gen_wigner, gram, read_matrix, write_minx
from .minor_scan import ScanResult, extract_minor, gershgorin_upper, scan, scan_exact_m, scan_le_m, unrank_combination
from .statistics import (EnvelopeSpec, SrcCertificate, envelope_gaussian, envelope_general, envelope_wigner,
                         normalized_deviations, src_certificate)

__version__ = "0.1.0"
