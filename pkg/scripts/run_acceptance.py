"""
Script to run the shipped acceptance configuration and print a per-check summary

With --sweep it runs every configs/acceptance_K*_n*.json instead, one
(depth, matrix size) point of the instance sweep at a time.
"""

import argparse
import glob
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from czlab.main import LabApp
from czlab.services.runner import EXIT_PASS
from czlab.services.storage import summary_frame

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'configs')
DEFAULT_CONFIG = os.path.join(CONFIG_DIR, 'acceptance.json')


def run_one(app: LabApp, path: str, jobs=None, out=None) -> int:
    config = app.load(path, output_dir=out, jobs=jobs)
    result = app.run(config)

    frame = summary_frame(result.reports)
    table = frame.groupby('check_id', sort=False).agg(
        reports=('pass', 'size'), passed=('pass', 'sum'), worst=('measured', 'max'))
    print(f"== {os.path.basename(path)} (K={config.K}, n={config.n})")
    print(table.to_string())
    if result.failed:
        print(f"Acceptance failures: {', '.join(sorted({r.check_id for r in result.failed}))}\n")
    else:
        print("All acceptance checks passed\n")
    return result.exit_status


def main():
    """Run the acceptance checks and report which ids failed"""
    parser = argparse.ArgumentParser(description=__doc__.strip().split('\n')[0])
    parser.add_argument('--config', default=DEFAULT_CONFIG)
    parser.add_argument('--sweep', action='store_true',
                        help='Run every acceptance_K*_n*.json configuration')
    parser.add_argument('--jobs', type=int)
    parser.add_argument('--out', help='Output directory (single configuration only)')
    args = parser.parse_args()

    app = LabApp()
    if not args.sweep:
        return run_one(app, args.config, args.jobs, args.out)
    statuses = [run_one(app, path, args.jobs)
                for path in sorted(glob.glob(os.path.join(CONFIG_DIR, 'acceptance_K*_n*.json')))]
    return max(statuses, default=EXIT_PASS)


if __name__ == '__main__':
    sys.exit(main())
