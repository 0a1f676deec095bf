from abc import ABC, abstractmethod

import numpy as np

from arikan_reference import arikan_sc, arikan_scl_batch
from scl_decoder import ListConfig, scl_decode_batch
from sc_decoder import DecoderOptions, HardDecision, decode_frames, sc_decode

DECODER_NAMES = ('sc', 'scl', 'arikan-sc', 'arikan-scl')


class FrameDecoder(ABC):
    """Base class for the decoders a campaign can drive"""

    uses_list = False

    def __init__(self, spec, list_size=1, options=None):
        self.spec = spec
        self.list_size = list_size if self.uses_list else 1
        self.options = options or DecoderOptions()

    @abstractmethod
    def decode_batch(self, channel_llrs, ops=None):
        """Decode a (F, n) batch into (messages, codewords)"""
        pass

    @abstractmethod
    def decode_with_metrics(self, channel_llrs, ops=None):
        """Decode a (F, n) batch into (messages, codewords, path metrics)"""
        pass


class SCDecoder(FrameDecoder):
    """ABS+ successive cancellation"""

    def decode_batch(self, channel_llrs, ops=None):
        return sc_decode(self.spec, np.atleast_2d(channel_llrs), self.options, ops)

    def decode_with_metrics(self, channel_llrs, ops=None):
        state = decode_frames(self.spec, np.atleast_2d(channel_llrs), HardDecision(), self.options, ops)
        return state.message, state.B(0).copy(), state.metric.copy()


class SCLDecoder(FrameDecoder):
    """ABS+ successive cancellation list, CRC-aided when the spec carries a CRC"""

    uses_list = True

    def decode_batch(self, channel_llrs, ops=None):
        messages, codewords, _ = self.decode_with_metrics(channel_llrs, ops)
        return messages, codewords

    def decode_with_metrics(self, channel_llrs, ops=None):
        result = scl_decode_batch(self.spec, channel_llrs, ListConfig.for_spec(self.spec, self.list_size),
                                  self.options, ops)
        return result.messages, result.codewords, result.metrics


class _ClassicalOnly(FrameDecoder):
    def __init__(self, spec, list_size=1, options=None):
        if not spec.is_classical:
            raise ValueError(f"Decoder '{self.name}' only handles codes without swap/add transforms")
        super().__init__(spec, list_size, options)

    def decode_with_metrics(self, channel_llrs, ops=None):
        # a list of one path makes the same decisions as SC and keeps the metric
        return arikan_scl_batch(self.spec.frozen, channel_llrs, ListConfig.for_spec(self.spec, self.list_size),
                                ops)


class ArikanSCDecoder(_ClassicalOnly):
    """Classical polar SC"""

    name = 'arikan-sc'

    def decode_batch(self, channel_llrs, ops=None):
        return arikan_sc(self.spec.frozen, np.atleast_2d(channel_llrs), ops)


class ArikanSCLDecoder(_ClassicalOnly):
    """Classical polar SCL"""

    name = 'arikan-scl'
    uses_list = True

    def decode_batch(self, channel_llrs, ops=None):
        messages, codewords, _ = self.decode_with_metrics(channel_llrs, ops)
        return messages, codewords


class DecoderFactory:
    """Factory for creating decoder instances"""

    @staticmethod
    def get_decoder(decoder_name, spec, list_size=1, options=None):
        """Get decoder instance by name, or None for an unknown name"""
        decoders = {
            'SC': SCDecoder,
            'SCL': SCLDecoder,
            'ARIKAN-SC': ArikanSCDecoder,
            'ARIKAN-SCL': ArikanSCLDecoder,
        }
        decoder_cls = decoders.get(decoder_name.upper())
        if decoder_cls is None:
            return None
        return decoder_cls(spec, list_size, options)
