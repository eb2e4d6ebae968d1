"""
Storage service: field and bundle containers, report files and plot data.

Field container (.czf)
    b'CZLF' | uint32 header length (little endian) | UTF-8 JSON header
    {d, K, n, level, boundary_mode, hermitian, projection} | values as
    little-endian complex128 (interleaved float64 real/imag), C order.

Bundle container (.czb)
    A zip archive with fixed entry timestamps holding manifest.json and one
    field container per named piece, so identical bundles give identical bytes.
"""

import json
import logging
import re
import struct
import zipfile
from dataclasses import asdict
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from openpyxl.styles import Alignment, Font, PatternFill

from czlab.config import config_manager
from czlab.exceptions import InvalidInput
from czlab.models.bundle import CuculescuSequence, CZBundle
from czlab.models.field import OperatorField, ProjectionField
from czlab.models.geometry import DyadicDomain
from czlab.models.report import CheckReport

logger = logging.getLogger(__name__)

FIELD_MAGIC = b'CZLF'
FIELD_SUFFIX = '.czf'
BUNDLE_SUFFIX = '.czb'
ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)

PathLike = Union[str, Path]


# Fields

def field_to_bytes(field: OperatorField) -> bytes:
    header = {
        'd': field.domain.d,
        'K': field.domain.K,
        'n': field.n,
        'level': field.level,
        'boundary_mode': field.domain.boundary_mode,
        'hermitian': bool(field.hermitian),
        'projection': isinstance(field, ProjectionField),
    }
    encoded = json.dumps(header, sort_keys=True).encode('utf-8')
    values = np.ascontiguousarray(field.values, dtype='<c16')
    return FIELD_MAGIC + struct.pack('<I', len(encoded)) + encoded + values.tobytes()


def field_from_bytes(data: bytes) -> OperatorField:
    if data[:4] != FIELD_MAGIC:
        raise InvalidInput("Not a field container (bad magic bytes)", 'field')
    try:
        (length,) = struct.unpack('<I', data[4:8])
        header = json.loads(data[8:8 + length].decode('utf-8'))
        domain = DyadicDomain(int(header['d']), int(header['K']), header['boundary_mode'])
        shape = domain.shape(int(header['level'])) + (int(header['n']),) * 2
    except (struct.error, UnicodeDecodeError, json.JSONDecodeError, KeyError) as e:
        raise InvalidInput(f"Corrupt field header: {e}", 'field')
    payload = data[8 + length:]
    expected = int(np.prod(shape)) * 16
    if len(payload) != expected:
        raise InvalidInput(f"Field payload holds {len(payload)} bytes, expected {expected}", 'field')
    values = np.frombuffer(payload, dtype='<c16').reshape(shape).astype(np.complex128)
    if header.get('projection'):
        return ProjectionField(domain, int(header['level']), values, True)
    return OperatorField(domain, int(header['level']), values, bool(header['hermitian']))


def save_field(field: OperatorField, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(field_to_bytes(field))
    logger.debug("Wrote %r to %s", field, path)
    return path


def load_field(path: PathLike) -> OperatorField:
    path = Path(path)
    if not path.is_file():
        raise InvalidInput(f"Field file not found: {path}", 'field')
    return field_from_bytes(path.read_bytes())


# Bundles

def _pair(key: Tuple[int, int]) -> str:
    return f"{key[0]}_{key[1]}"


def _unpair(text: str) -> Tuple[int, int]:
    a, b = text.split('_')
    return int(a), int(b)


def bundle_entries(bundle: CZBundle) -> Dict[str, OperatorField]:
    """Every named field of a bundle, keyed by its archive name"""
    entries = {'f': bundle.f, 'g_d': bundle.g_d, 'g_off': bundle.g_off, 'b_d': bundle.b_d,
               'b_off': bundle.b_off, 'zeta': bundle.zeta}
    entries.update({f'q/{k}': q for k, q in bundle.cuculescu.q.items()})
    entries.update({f'p/{k}': p for k, p in bundle.cuculescu.p.items()})
    entries.update({f'b_diag/{n}': b for n, b in bundle.b_diag.items()})
    for name in ('b_pairs', 'b_offdiag', 'g_left', 'g_right'):
        entries.update({f'{name}/{_pair(key)}': piece
                        for key, piece in getattr(bundle, name).items()})
    return entries


def save_bundle(bundle: CZBundle, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    entries = bundle_entries(bundle)
    manifest = dict(bundle.manifest(), entries=sorted(entries),
                    schema_version=config_manager.get_app_config('REPORT_SCHEMA_VERSION'))
    with zipfile.ZipFile(path, 'w', compression=zipfile.ZIP_DEFLATED) as archive:
        archive.writestr(zipfile.ZipInfo('manifest.json', ZIP_EPOCH),
                         json.dumps(manifest, sort_keys=True, indent=2))
        for name in sorted(entries):
            info = zipfile.ZipInfo(name + FIELD_SUFFIX, ZIP_EPOCH)
            info.compress_type = zipfile.ZIP_DEFLATED
            archive.writestr(info, field_to_bytes(entries[name]))
    logger.info("Saved bundle (lambda=%g, %d fields) to %s", bundle.lam, len(entries), path)
    return path


def load_bundle(path: PathLike) -> CZBundle:
    path = Path(path)
    if not path.is_file():
        raise InvalidInput(f"Bundle file not found: {path}", 'bundle')
    try:
        with zipfile.ZipFile(path) as archive:
            manifest = json.loads(archive.read('manifest.json'))
            fields = {name: field_from_bytes(archive.read(name + FIELD_SUFFIX))
                      for name in manifest['entries']}
    except (zipfile.BadZipFile, KeyError, json.JSONDecodeError) as e:
        raise InvalidInput(f"Corrupt bundle {path}: {e}", 'bundle')

    def group(prefix, parse):
        return {parse(name[len(prefix) + 1:]): value for name, value in fields.items()
                if name.startswith(prefix + '/')}

    cuculescu = CuculescuSequence(float(manifest['lambda']), group('q', int), group('p', int))
    return CZBundle(
        f=fields['f'], cuculescu=cuculescu,
        g_d=fields['g_d'], g_off=fields['g_off'], b_d=fields['b_d'], b_off=fields['b_off'],
        zeta=fields['zeta'],
        b_diag=group('b_diag', int),
        b_pairs=group('b_pairs', _unpair),
        b_offdiag=group('b_offdiag', _unpair),
        g_left=group('g_left', _unpair),
        g_right=group('g_right', _unpair),
    )


# Reports

def _slug(text: str) -> str:
    return re.sub(r'[^A-Za-z0-9_.-]+', '_', str(text)).strip('_') or 'run'


def report_lines(reports: Iterable[CheckReport]) -> List[str]:
    return [json.dumps(report.to_dict(), sort_keys=True) for report in reports]


def write_reports_jsonl(reports: Sequence[CheckReport], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = report_lines(reports)
    path.write_text('\n'.join(lines) + ('\n' if lines else ''))
    return path


def read_reports_jsonl(path: PathLike) -> List[Dict]:
    """Decoded report records, one per non-empty line"""
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]


def summary_frame(reports: Sequence[CheckReport]) -> pd.DataFrame:
    return pd.DataFrame([report.summary_row() for report in reports])


def write_summary_csv(reports: Sequence[CheckReport], path: PathLike) -> Path:
    path = Path(path)
    summary_frame(reports).to_csv(path, index=False)
    return path


def _style_header(ws):
    header_fill = PatternFill(start_color="305496", end_color="305496", fill_type="solid")
    header_font = Font(color="FFFFFF", bold=True)
    center = Alignment(horizontal="center", vertical="center")
    for cell in ws[1]:
        cell.fill = header_fill
        cell.font = header_font
        cell.alignment = center
    for column in ws.columns:
        width = max(len(str(cell.value)) if cell.value is not None else 0 for cell in column)
        ws.column_dimensions[column[0].column_letter].width = min(max(10, width + 2), 48)


def write_workbook(reports: Sequence[CheckReport], path: PathLike) -> Path:
    """One sheet per check id, in first-seen order, each with a styled header row"""
    path = Path(path)
    frame = summary_frame(reports)
    with pd.ExcelWriter(path, engine="openpyxl") as writer:
        if frame.empty:
            frame.to_excel(writer, index=False, sheet_name='summary')
            _style_header(writer.book['summary'])
            return path
        used = set()
        for check_id in dict.fromkeys(frame['check_id']):
            sheet_name = check_id[:31]
            suffix = 1
            while sheet_name in used:
                suffix += 1
                sheet_name = f"{check_id[:28]}~{suffix}"
            used.add(sheet_name)
            rows = frame[frame['check_id'] == check_id].dropna(axis=1, how='all')
            rows.to_excel(writer, index=False, sheet_name=sheet_name)
            _style_header(writer.book[sheet_name])
    return path


def write_sweeps(reports: Sequence[CheckReport], directory: PathLike) -> List[Path]:
    """Each decay sweep as a two-column CSV (parameter, ratio)"""
    directory = Path(directory)
    written = []
    for index, report in enumerate(reports):
        for sweep in report.sweeps:
            directory.mkdir(parents=True, exist_ok=True)
            family = report.instance.get('family', report.instance.get('scope', 'run'))
            name = _slug(f"{report.check_id}__{family}_{report.instance.get('index', index)}"
                         f"__{sweep.label or sweep.parameter}")
            path = directory / f"{name}.csv"
            frame = pd.DataFrame(sweep.rows(), columns=[sweep.parameter, 'ratio'])
            frame.to_csv(path, index=False)
            written.append(path)
    return written


def write_run_outputs(reports: Sequence[CheckReport], output_dir: PathLike, config=None,
                      exit_status: int = None) -> Dict[str, List[str]]:
    """Reports, summaries, sweeps and a manifest under output_dir"""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    files = {
        'reports': [str(write_reports_jsonl(reports, output_dir / 'reports.jsonl'))],
        'summary': [str(write_summary_csv(reports, output_dir / 'summary.csv')),
                    str(write_workbook(reports, output_dir / 'summary.xlsx'))],
        'sweeps': [str(p) for p in write_sweeps(reports, output_dir / 'sweeps')],
    }
    manifest = {
        'schema_version': config_manager.get_app_config('REPORT_SCHEMA_VERSION'),
        'reports': len(reports),
        'failed': sorted({r.check_id for r in reports if not r.passed}),
        'failed_acceptance': sorted({r.check_id for r in reports if r.acceptance and not r.passed}),
        'exit_status': exit_status,
        'files': {key: [Path(p).name if key != 'sweeps' else f"sweeps/{Path(p).name}"
                        for p in paths] for key, paths in files.items()},
    }
    if config is not None:
        manifest['config'] = asdict(config)
    (output_dir / 'manifest.json').write_text(json.dumps(manifest, sort_keys=True, indent=2,
                                                        default=str))
    logger.info("Wrote %d reports and %d sweep files to %s", len(reports),
                len(files['sweeps']), output_dir)
    return files
