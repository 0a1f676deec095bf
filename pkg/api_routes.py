import logging

import numpy as np
from flask import Blueprint, request, jsonify

from codespec import SpecConstraintError, SpecSyntaxError, require_valid, spec_from_dict
from decoder_registry import DecoderFactory
from encoder import build_message, encode, extract_payload
from harness import count_ops, verify_spec
from sc_decoder import MODES, DecoderOptions

decoder_bp = Blueprint('decoder_bp', __name__)

MAX_API_TRIALS = 10000


class BadRequest(ValueError):
    pass


def _spec(data):
    if 'spec' not in data:
        raise BadRequest("Missing required field: spec")
    return require_valid(spec_from_dict(data['spec']))


def _bit_string(text, length, name):
    if not isinstance(text, str) or len(text) != length or set(text) - {'0', '1'}:
        raise BadRequest(f"'{name}' must be a string of {length} binary digits")
    return np.array([int(c) for c in text], dtype=np.uint8)


def _int_field(data, name, default, low, high):
    value = data.get(name, default)
    if not isinstance(value, int) or isinstance(value, bool) or not low <= value <= high:
        raise BadRequest(f"'{name}' must be an integer between {low} and {high}")
    return value


def _as_string(bits):
    return ''.join(str(int(b)) for b in bits)


def _handle(action):
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        return jsonify({'error': 'Request body must be a JSON object'}), 400
    try:
        return jsonify(action(data)), 200
    except (BadRequest, SpecSyntaxError, SpecConstraintError, ValueError) as e:
        return jsonify({'error': str(e)}), 400
    except Exception as e:
        logging.error(f"Request to {request.path} failed: {e}", exc_info=True)
        return jsonify({'error': f'Internal error: {str(e)}'}), 500


@decoder_bp.route('/health', methods=['GET'])
def health():
    return jsonify({'status': 'ok'}), 200


def _encode(data):
    spec = _spec(data)
    payload = _bit_string(data.get('payload'), spec.k, 'payload')
    return {'codeword': _as_string(encode(spec, build_message(spec, payload)))}


def _decode(data):
    spec = _spec(data)
    if 'llrs' in data:
        llrs = np.asarray(data['llrs'], dtype=np.float64)
        if llrs.shape != (spec.n,):
            raise BadRequest(f"'llrs' must be a list of n={spec.n} numbers")
    elif 'codeword' in data:
        llrs = 1.0 - 2.0 * _bit_string(data['codeword'], spec.n, 'codeword')
    else:
        raise BadRequest("Provide either 'llrs' or 'codeword'")
    list_size = _int_field(data, 'list_size', 1, 1, 1024)
    decoder = DecoderFactory.get_decoder(str(data.get('decoder', 'sc')), spec, list_size, DecoderOptions())
    if decoder is None:
        raise BadRequest(f"Unknown decoder '{data.get('decoder')}'")
    messages, codewords, metrics = decoder.decode_with_metrics(llrs[None, :])
    payload, crc_ok = extract_payload(spec, messages[0])
    metric = float(metrics[0])
    return {'payload': _as_string(payload), 'codeword': _as_string(codewords[0]),
            'metric': metric, 'crc_ok': bool(crc_ok)}


def _count_ops(data):
    spec = _spec(data)
    mode = data.get('mode', 'default')
    if mode not in MODES:
        raise BadRequest(f"Unknown computation mode '{mode}'")
    decoder = str(data.get('decoder', 'sc'))
    if DecoderFactory.get_decoder(decoder, spec) is None:
        raise BadRequest(f"Unknown decoder '{decoder}'")
    result = count_ops(spec, decoder, _int_field(data, 'list_size', 1, 1, 1024),
                       _int_field(data, 'trials', 100, 1, MAX_API_TRIALS), _int_field(data, 'seed', 0, 0, 2 ** 31),
                       mode)
    return result.to_dict()


def _verify(data):
    spec = _spec(data)
    checks = verify_spec(spec, trials=_int_field(data, 'trials', 100, 1, MAX_API_TRIALS),
                         seed=_int_field(data, 'seed', 0, 0, 2 ** 31))
    return {'passed': all(c.passed is not False for c in checks), 'checks': [c.to_dict() for c in checks]}


@decoder_bp.route('/encode', methods=['POST'])
def encode_payload():
    return _handle(_encode)


@decoder_bp.route('/decode', methods=['POST'])
def decode_frame():
    return _handle(_decode)


@decoder_bp.route('/count-ops', methods=['POST'])
def count_operations():
    return _handle(_count_ops)


@decoder_bp.route('/verify', methods=['POST'])
def verify():
    return _handle(_verify)
