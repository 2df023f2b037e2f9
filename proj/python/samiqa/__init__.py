"""Python bindings for the spatial-frequency image quality pipeline."""

try:
    from . import _samiqa  # installed layout: extension inside the package
except ImportError:
    import _samiqa  # build-tree layout: extension on sys.path

adaptive_avg_pool2d = _samiqa.adaptive_avg_pool2d
conv2d = _samiqa.conv2d
evaluate = _samiqa.evaluate
feature_distance = _samiqa.feature_distance
fourier_conv = _samiqa.fourier_conv
gen_corpus = _samiqa.gen_corpus
irfft2 = _samiqa.irfft2
plcc = _samiqa.plcc
psnr = _samiqa.psnr
rfft2 = _samiqa.rfft2
srcc = _samiqa.srcc
toy_encode = _samiqa.toy_encode
train = _samiqa.train

__all__ = [
    "adaptive_avg_pool2d",
    "conv2d",
    "evaluate",
    "feature_distance",
    "fourier_conv",
    "gen_corpus",
    "irfft2",
    "plcc",
    "psnr",
    "rfft2",
    "srcc",
    "toy_encode",
    "train",
]
