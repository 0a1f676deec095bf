import os
import logging

# Logging
LOG_LEVEL = os.getenv('ABSPOLAR_LOG_LEVEL', 'INFO')
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'

# Decoder
DEBUG_CHECKS = os.getenv('ABSPOLAR_DEBUG', '0') == '1'
LLR_CLAMP = float(os.getenv('ABSPOLAR_LLR_CLAMP', '0')) or None
BSC_LLR_CLAMP = float(os.getenv('ABSPOLAR_BSC_CLAMP', '1000'))
DEBUG_TOLERANCE = 1e-9

# CRC (payload protection for list decoding)
CRC_POLY = int(os.getenv('ABSPOLAR_CRC_POLY', '0x1021'), 0)
CRC_WIDTH = int(os.getenv('ABSPOLAR_CRC_WIDTH', '16'))

# Simulation campaigns
WORKERS = int(os.getenv('ABSPOLAR_WORKERS', '1'))
BATCH_FRAMES = int(os.getenv('ABSPOLAR_BATCH_FRAMES', '64'))
MAX_FRAMES = int(os.getenv('ABSPOLAR_MAX_FRAMES', str(10**6)))
MIN_FRAME_ERRORS = int(os.getenv('ABSPOLAR_MIN_FRAME_ERRORS', '100'))
MIN_ERRORS_FLOOR = int(os.getenv('ABSPOLAR_MIN_ERRORS_FLOOR', '20'))

# Construction
CONSTRUCTION_TRIALS = int(os.getenv('ABSPOLAR_CONSTRUCTION_TRIALS', '2000'))
CONSTRUCTION_BATCH = int(os.getenv('ABSPOLAR_CONSTRUCTION_BATCH', '256'))
MIN_CONSTRUCTION_TRIALS = 1000

# HTTP service
API_HOST = os.getenv('ABSPOLAR_API_HOST', '0.0.0.0')
API_PORT = int(os.getenv('ABSPOLAR_API_PORT', '5000'))


def configure_logging(level=None):
    """Configure root logging once for an entry point."""
    logging.basicConfig(level=(level or LOG_LEVEL).upper(), format=LOG_FORMAT)
