"""Command-line front end: construct, encode, decode, simulate, verify, count-ops and serve."""
import argparse
import logging
import sys

import numpy as np

import config
from codespec import CrcSpec, SpecConstraintError, SpecSyntaxError, load_spec, serialize_spec
from construction import construct_spec
from decoder_registry import DECODER_NAMES, DecoderFactory
from encoder import build_message, encode, extract_payload
from harness import CampaignConfig, count_ops, run_fer_campaign, verify_spec
from sc_decoder import MODES, DecoderOptions
from worker import CampaignError


def parse_bits(text, length, fmt='hex'):
    """Bits from MSB-first hex (zero-padded to ``length`` bits) or a plain 0/1 string."""
    text = text.strip()
    if fmt == 'bin':
        if len(text) != length or set(text) - {'0', '1'}:
            raise ValueError(f"Expected {length} binary digits, got '{text}'")
        return np.array([int(c) for c in text], dtype=np.uint8)
    digits = text[2:] if text.lower().startswith('0x') else text
    try:
        value = int(digits, 16) if digits else 0
    except ValueError:
        raise ValueError(f"'{text}' is not a hexadecimal number")
    if value >> length:
        raise ValueError(f"Hex value '{text}' does not fit in {length} bits")
    return np.array([(value >> (length - 1 - i)) & 1 for i in range(length)], dtype=np.uint8)


def format_bits(bits, fmt='hex'):
    bits = [int(b) for b in bits]
    if fmt == 'bin':
        return ''.join(str(b) for b in bits)
    if not bits:
        return ''
    value = 0
    for b in bits:
        value = (value << 1) | b
    return f"{value:0{(len(bits) + 3) // 4}x}"


def read_llrs(path, n):
    with open(path, encoding='utf-8') as fh:
        values = fh.read().replace(',', ' ').split()
    try:
        llrs = np.array([float(v) for v in values])
    except ValueError as e:
        raise ValueError(f"Unreadable LLR file {path}: {e}")
    if llrs.size != n:
        raise ValueError(f"LLR file {path} holds {llrs.size} values, expected n={n}")
    return llrs


def _decoder(name, spec, list_size, mode='default'):
    decoder = DecoderFactory.get_decoder(name, spec, list_size, DecoderOptions.for_mode(mode))
    if decoder is None:
        raise ValueError(f"Unknown decoder '{name}'")
    return decoder


def cmd_construct(args):
    crc = CrcSpec(config.CRC_POLY, config.CRC_WIDTH) if args.crc else None
    spec = construct_spec(args.m, args.k, args.ebno, budget=args.budget, trials=args.trials,
                          seed=args.seed, crc=crc)
    text = serialize_spec(spec)
    if args.out:
        with open(args.out, 'w', encoding='utf-8') as fh:
            fh.write(text)
        logging.info(f"Wrote spec to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_encode(args):
    spec = load_spec(args.spec)
    payload = parse_bits(args.payload, spec.k, args.format)
    print(format_bits(encode(spec, build_message(spec, payload)), args.format))
    return 0


def cmd_decode(args):
    spec = load_spec(args.spec)
    if args.llrs:
        llrs = read_llrs(args.llrs, spec.n)
    else:
        codeword = parse_bits(args.codeword, spec.n, args.format)
        llrs = 1.0 - 2.0 * codeword
    decoder = _decoder(args.decoder, spec, args.list, args.mode)
    messages, codewords = decoder.decode_batch(llrs[None, :])
    payload, crc_ok = extract_payload(spec, messages[0])
    print(format_bits(payload, args.format))
    print(f"codeword: {format_bits(codewords[0], args.format)}")
    if spec.crc is not None:
        print(f"crc: {'ok' if crc_ok else 'fail'}")
    return 0


def cmd_simulate(args):
    cfg = CampaignConfig.from_spec_file(
        args.spec, decoder=args.decoder, list_sizes=tuple(args.list), snr_grid=tuple(args.snr),
        max_frames=args.max_frames, min_frame_errors=args.min_errors, seed=args.seed, output=args.out,
        batch_frames=args.batch, workers=args.workers, mode=args.mode, timing=not args.no_timing,
        progress=not args.quiet and sys.stderr.isatty())
    rows = run_fer_campaign(cfg)
    if not args.out:
        for row in rows:
            print(','.join(row.csv_fields()))
    return 0


def cmd_verify(args):
    checks = verify_spec(load_spec(args.spec), trials=args.trials, seed=args.seed)
    failed = False
    for check in checks:
        if check.passed is None:
            print(f"➖ {check.name}: {check.detail}")
        elif check.passed:
            print(f"✅ {check.name}: {check.detail}")
        else:
            failed = True
            print(f"❌ {check.name}: {check.detail}")
    return 1 if failed else 0


def cmd_count_ops(args):
    result = count_ops(load_spec(args.spec), args.decoder, args.list, args.trials, args.seed, args.mode, args.ebno)
    print(f"mean_adds={result.mean_additions:.1f} mean_cmps={result.mean_comparisons:.1f}")
    return 0


def cmd_serve(args):
    from main import app
    app.run(host=args.host, port=args.port)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog='abspolar', description='ABS+ polar code construction, decoding and simulation')
    parser.add_argument('--log-level', default=config.LOG_LEVEL, help='logging level (default: %(default)s)')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('construct', help='build a code spec by Monte-Carlo construction')
    p.add_argument('--m', type=int, required=True)
    p.add_argument('--k', type=int, required=True)
    p.add_argument('--ebno', type=float, default=2.0, help='design Eb/N0 in dB')
    p.add_argument('--budget', type=int, default=0, help='swap/add candidates tried per layer')
    p.add_argument('--trials', type=int, default=config.CONSTRUCTION_TRIALS)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--crc', action='store_true', help='append the configured CRC to the payload')
    p.add_argument('--out')
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser('encode', help='encode one payload')
    p.add_argument('--spec', required=True)
    p.add_argument('--payload', required=True)
    p.add_argument('--format', choices=('hex', 'bin'), default='hex')
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser('decode', help='decode one frame')
    p.add_argument('--spec', required=True)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument('--codeword', help='noiseless received codeword')
    source.add_argument('--llrs', help='file of n channel LLRs')
    p.add_argument('--decoder', choices=DECODER_NAMES, default='sc')
    p.add_argument('--list', type=int, default=1)
    p.add_argument('--mode', choices=tuple(MODES), default='default')
    p.add_argument('--format', choices=('hex', 'bin'), default='hex')
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser('simulate', help='run an FER campaign')
    p.add_argument('--spec', required=True)
    p.add_argument('--decoder', choices=DECODER_NAMES, default='scl')
    p.add_argument('--list', type=int, nargs='+', default=[1])
    p.add_argument('--snr', type=float, nargs='+', required=True, help='Eb/N0 grid in dB')
    p.add_argument('--max-frames', type=int, default=config.MAX_FRAMES)
    p.add_argument('--min-errors', type=int, default=config.MIN_FRAME_ERRORS)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--batch', type=int, default=config.BATCH_FRAMES)
    p.add_argument('--workers', type=int, default=config.WORKERS)
    p.add_argument('--mode', choices=tuple(MODES), default='default')
    p.add_argument('--out', help='CSV path (rows go to stdout otherwise)')
    p.add_argument('--no-timing', action='store_true', help='write 0.0 seconds for reproducible files')
    p.add_argument('--quiet', action='store_true', help='no progress bar')
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser('verify', help='run the brute-force checks on a spec')
    p.add_argument('--spec', required=True)
    p.add_argument('--trials', type=int, default=200)
    p.add_argument('--seed', type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser('count-ops', help='mean LLR operations per frame')
    p.add_argument('--spec', required=True)
    p.add_argument('--decoder', choices=DECODER_NAMES, default='sc')
    p.add_argument('--list', type=int, default=1)
    p.add_argument('--trials', type=int, default=100)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--mode', choices=tuple(MODES), default='default')
    p.add_argument('--ebno', type=float, default=2.0)
    p.set_defaults(func=cmd_count_ops)

    p = sub.add_parser('serve', help='start the HTTP service')
    p.add_argument('--host', default=config.API_HOST)
    p.add_argument('--port', type=int, default=config.API_PORT)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    config.configure_logging(args.log_level)
    try:
        return args.func(args)
    except (SpecSyntaxError, SpecConstraintError, ValueError, OSError, CampaignError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
