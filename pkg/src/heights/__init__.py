"""Exact and numerical height functionals on polarized integral models."""

from .errors import (HeightsError, NumericError, ValidationError)
from .heightvalue import HeightValue, ZERO, as_height, is_prime
from .intersection import (DivisorClassId, FiberComponent, FormalSum,
                           IntersectionModel, ModelPair, SymmetricForm,
                           form_key)
from .functionals import (arakelov_calabi, arakelov_energy,
                          aubin_I_rel, aubin_J_rel,
                          component_twist_derivative, decomposition_check,
                          entropy_rel, model_beta, modular_height,
                          na_calabi, na_scalar_curvature, normalized_df,
                          normalized_df_twisted, relative_modular_height,
                          rescale_metric_const, ricci_energy_rel,
                          slope_semistability_test, twist_by_base_divisor)
from .geometry import SphereGeometry, TorusGeometry, make_geometry
from .potentials import (PotentialField, load_potential_csv,
                         save_potential_csv)
from .energies import (am_energy, apply_metric_change, aubin_i, aubin_j,
                       bott_chern_delta, cubic_identity_check, entropy,
                       k_energy, metric_model_pair, ricci_density,
                       ricci_energy, scalar_curvature_l2)
from .quantize import (SectionGram, arithmetic_degree, balanced_iterate,
                       balanced_step, bergman_density, chow_height,
                       dequantization_scan, extended_chow_height,
                       fubini_study_of, hilbert_samuel_residual, l2_gram,
                       l2_gram_quadrature, p1_deg_hat)
from .toric import (ToricThreefold, barycentric_log_discrepancy,
                    blowup_family_oracle, toric_log_discrepancy)
from .families import (BrieskornPhamSpec, EllipticCurveData,
                       brieskorn_pham_analyze, build_p1_fs,
                       build_p2_blowup_family, curve_from_label,
                       curve_periods, elliptic_faltings_height,
                       faltings_to_hk, multiplicity_from_lengths)

__version__ = "1.0.0"
