"""
Script to compare two result directories report by report
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pandas as pd

KEYS = ['check_id', 'instance.family', 'instance.index']


def load_summary(directory: str) -> pd.DataFrame:
    frame = pd.read_csv(os.path.join(directory, 'summary.csv'))
    for key in KEYS:
        if key not in frame.columns:
            frame[key] = ''
    frame['row'] = frame.groupby(KEYS, dropna=False).cumcount()
    return frame


def main():
    """Print every report whose measured value or verdict differs between runs"""
    parser = argparse.ArgumentParser(description=__doc__.strip())
    parser.add_argument('first')
    parser.add_argument('second')
    parser.add_argument('--rtol', type=float, default=1e-9)
    args = parser.parse_args()

    left, right = load_summary(args.first), load_summary(args.second)
    merged = left.merge(right, on=KEYS + ['row'], how='outer', suffixes=('_a', '_b'),
                        indicator=True)
    missing = merged[merged['_merge'] != 'both']
    both = merged[merged['_merge'] == 'both']
    a = pd.to_numeric(both['measured_a'], errors='coerce')
    b = pd.to_numeric(both['measured_b'], errors='coerce')
    drift = (a - b).abs() > args.rtol * pd.concat([a.abs(), b.abs()], axis=1).max(axis=1).clip(lower=1.0)
    changed = both[drift | (both['pass_a'] != both['pass_b'])]

    print(f"{len(both)} matched reports, {len(missing)} unmatched, {len(changed)} changed")
    if len(changed):
        print(changed[KEYS + ['measured_a', 'measured_b', 'pass_a', 'pass_b']].to_string(index=False))
    return 1 if len(changed) or len(missing) else 0


if __name__ == '__main__':
    sys.exit(main())
