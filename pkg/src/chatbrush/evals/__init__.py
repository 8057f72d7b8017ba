from .fid import EIG_CLAMP_TOL, FeatureSet, fid
from .prd import cluster_histograms, prd, prd_curve_from_histograms
from .report import edit_quality_report, generate_edits, write_report
