from .checkpoint import load_checkpoint, save_checkpoint
from .gradcheck import GradientCheckReport, gradient_check
from .losses import bbgan_loss, gan_loss, roi_content_term
from .networks import ConvDiscriminator, UNetGenerator
from .training import BBGAN, images_to_tensor, masks_to_tensor, train_bbgan

__all__ = [
    "BBGAN",
    "ConvDiscriminator",
    "GradientCheckReport",
    "UNetGenerator",
    "bbgan_loss",
    "gan_loss",
    "gradient_check",
    "images_to_tensor",
    "load_checkpoint",
    "masks_to_tensor",
    "roi_content_term",
    "save_checkpoint",
    "train_bbgan",
]
