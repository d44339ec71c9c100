"""Single-image denoising with restore-from-restored test-time fine-tuning."""

from .engine import (
    FinetuneConfig,
    apply_transform,
    invert_transform,
    pseudo_clean,
    rfr_finetune,
    rfr_finetune_snapshots,
    rfr_loss_step,
)
from .metrics import ScoreRow, evaluate_corpus, psnr, ssim
from .net import (
    DenoiserNet,
    NetConfig,
    denoise,
    init_net,
    load_checkpoint,
    save_checkpoint,
)
from .noise import (
    CrfParams,
    GaussianBlind,
    GaussianKnown,
    Isp,
    add_awgn,
    add_isp_noise,
    sample_sigma,
)
from .optim import AdamState, adam_step, sgd_step
from .selfsim import (
    RecurrenceLayout,
    average_recurring_patches,
    equivariance_report,
    grid_positions,
    make_recurrence_image,
    output_spread,
)
from .train import PretrainConfig, pretrain

__version__ = "0.1.0"
