"""Tensor completion toolkit built on the fully-connected tensor network
(FCTN) decomposition, with a two-stage nonlocal patch-group inpainting
pipeline for multispectral images and image time series."""

__version__ = "0.1.0"

from .tensors import (
    ModeSplit,
    axpy,
    frobenius_norm,
    gen_fold,
    gen_unfold,
    hadamard,
    mode_fold,
    mode_unfold,
    permute,
)
from .fctn import (
    FctnFactors,
    FctnRank,
    LooComposite,
    contract_all,
    eval_element,
    eval_full_naive,
    leave_one_out,
    unfold_leave_one_out,
    validate_factors,
)
from .completion import (
    PamConfig,
    PamTrace,
    init_factors,
    pam_complete,
    update_factor,
    update_tensor,
)
from .patches import (
    KeyLattice,
    NssGroup,
    PatchGrid,
    aggregate,
    block_match,
    build_key_lattice,
    build_patch_grid,
    extract_patch,
    form_group,
    patch_stack,
)
from .pipeline import (
    InpaintConfig,
    InpaintReport,
    nl_fctn_inpaint,
    stage_global,
    stage_nonlocal,
)
from .metrics import MetricsReport, evaluate, psnr, sam, ssim
from .tensor_io import load_mask, load_tensor, make_mask, save_mask, save_tensor

__all__ = [
    "__version__",
    "ModeSplit", "gen_unfold", "gen_fold", "mode_unfold", "mode_fold",
    "permute", "hadamard", "axpy", "frobenius_norm",
    "FctnRank", "FctnFactors", "LooComposite", "contract_all",
    "eval_element", "eval_full_naive", "leave_one_out",
    "unfold_leave_one_out", "validate_factors",
    "PamConfig", "PamTrace", "init_factors", "update_factor",
    "update_tensor", "pam_complete",
    "PatchGrid", "KeyLattice", "NssGroup", "build_patch_grid",
    "build_key_lattice", "block_match", "form_group", "aggregate",
    "patch_stack", "extract_patch",
    "InpaintConfig", "InpaintReport", "stage_global", "stage_nonlocal",
    "nl_fctn_inpaint",
    "MetricsReport", "evaluate", "psnr", "ssim", "sam",
    "load_tensor", "save_tensor", "load_mask", "save_mask", "make_mask",
]
