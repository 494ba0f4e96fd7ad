"""Wavelet-feature K-means, fuzzy C-means and active-contour segmentation."""

__version__ = "0.1.0"

from .acwe import AcweParams, AcweResult, acwe_energy, acwe_w, init_levelset, region_means
from .clustering import (
    ClusterResult,
    assign_hard,
    defuzzify,
    fcm_membership_update,
    fcm_w,
    kmeans_w,
    update_centroids,
)
from .errors import (
    ConfigError,
    ConstantImageError,
    DegenerateRegionError,
    DimensionError,
    FormatError,
    IoError,
    PlacementError,
    UnknownFilterError,
    WavesegError,
)
from .filterbank import (
    FilterPair,
    ValidationReport,
    builtin_filter_pair,
    check_perfect_reconstruction,
    load_filter_pair,
    make_filter_pair,
    resolve_filter,
)
from .imageio import read_image, read_labels, write_image, write_mask
from .metrics import EvalReport, best_permutation, dice, iou, misclassification
from .phantom import LabeledImage, PhantomSpec, make_phantom, otsu_binarize
from .wavelets import (
    FeatureField,
    WaveletPyramid,
    WeightingConfig,
    apply_weighting,
    extract_first_tree,
    feature_field,
    feature_field_reference,
    wavedec2,
    waverec2,
)
