"""seganforge: waveform-domain speech enhancement GAN toolkit with transfer-learning experiments"""

__version__ = "1.0.0"
