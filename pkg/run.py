"""
Command-line entry point for the Calderon-Zygmund laboratory

    python run.py run configs/acceptance.json [--seed S] [--out DIR] [--jobs J]
    python run.py gen configs/minimal.json corpus/ [--bundles]
    python run.py check corpus/diagonal_0_plus_lam0.czb weak11
    python run.py oracle corpus/diagonal_0.czf T_k --params k=2

Exit codes: 0 pass, 1 acceptance failure, 2 usage or configuration error.
"""

import argparse
import json
import logging
import sys

from dotenv import load_dotenv

from czlab.exceptions import LabException
from czlab.services.runner import EXIT_PASS, EXIT_USAGE
from czlab.utils.formatters import format_measured, format_outcome
from czlab.utils.validators import parse_params

logger = logging.getLogger('czlab.cli')


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors already; keep the message on stderr"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='czlab', description=__doc__.split('\n\n')[0].strip())
    parser.add_argument('--log-level', default=None, help='DEBUG, INFO, WARNING or ERROR')
    commands = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)

    run = commands.add_parser('run', help='Run the checks of a configuration')
    run.add_argument('config')
    run.add_argument('--seed', type=int)
    run.add_argument('--out', help='Output directory (overrides the configuration)')
    run.add_argument('--jobs', type=int)

    gen = commands.add_parser('gen', help='Write the corpus of a configuration to disk')
    gen.add_argument('spec')
    gen.add_argument('out')
    gen.add_argument('--seed', type=int)
    gen.add_argument('--bundles', action='store_true',
                     help='Also store the decomposition of every instance at every lambda')

    check = commands.add_parser('check', help='Run one check on a stored bundle or field')
    check.add_argument('bundle')
    check.add_argument('check_id')
    check.add_argument('--seed', type=int, default=0)
    check.add_argument('--jobs', type=int)
    check.add_argument('--out', help='Directory for the reports of this check')
    check.add_argument('--lambda-grid', type=float, nargs='+',
                       help='Multipliers of the admissibility floor, for field inputs')

    oracle = commands.add_parser('oracle', help='Scalar reference value of an operation')
    oracle.add_argument('field')
    oracle.add_argument('op_id')
    oracle.add_argument('--params', help="k=v pairs or a JSON object, e.g. 'k=2,n=4'")
    oracle.add_argument('--out', help='Write the JSON result here instead of stdout')
    return parser


def _print_reports(reports):
    for report in reports:
        print(f"{report.check_id:32s} {format_outcome(report.passed, report.acceptance):22s} "
              f"measured={format_measured(report.measured)}")


def main(argv=None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)

    from czlab.main import LabApp
    from czlab.services import storage

    app = LabApp(args.log_level)
    try:
        if args.command == 'run':
            config = app.load(args.config, seed=args.seed, output_dir=args.out, jobs=args.jobs)
            result = app.run(config)
            print(f"{len(result.reports)} reports, {len(result.failed)} acceptance failures "
                  f"-> {config.output_dir}")
            return result.exit_status
        if args.command == 'gen':
            config = app.load(args.spec, seed=args.seed)
            written = app.gen(config, args.out, bundles=args.bundles)
            print(f"Wrote {len(written)} files to {args.out}")
            return EXIT_PASS
        if args.command == 'check':
            result = app.check(args.bundle, args.check_id, args.lambda_grid, args.seed, args.jobs)
            _print_reports(result.reports)
            if args.out:
                storage.write_run_outputs(result.reports, args.out, exit_status=result.exit_status)
            return result.exit_status
        payload = app.oracle(args.field, args.op_id, parse_params(args.params))
        text = json.dumps(payload, indent=2)
        if args.out:
            with open(args.out, 'w') as handle:
                handle.write(text + '\n')
        else:
            print(text)
        return EXIT_PASS
    except LabException as e:
        logger.error("%s", e.message)
        print(json.dumps(e.to_dict()), file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
