"""
Tests for field and bundle containers and the run output files
"""

import json
import zipfile

import numpy as np
import pandas as pd
import pytest

from czlab.exceptions import InvalidInput
from czlab.models.field import ProjectionField
from czlab.models.report import CheckReport, DecaySweep
from czlab.services import czd, storage


@pytest.fixture
def bundle(psd_field):
    return czd.cz_decompose(psd_field, 2.0 * czd.admissibility_floor(psd_field))


def test_field_container_layout(psd_field):
    data = storage.field_to_bytes(psd_field)
    assert data[:4] == storage.FIELD_MAGIC
    assert data == storage.field_to_bytes(psd_field)
    restored = storage.field_from_bytes(data)
    assert np.array_equal(restored.values, psd_field.values)
    assert restored.domain == psd_field.domain


def test_projection_fields_keep_their_type(line):
    projection = ProjectionField.identity(line, 2, 3)
    restored = storage.field_from_bytes(storage.field_to_bytes(projection))
    assert isinstance(restored, ProjectionField)
    assert restored.level == 3


def test_bad_containers_are_rejected(psd_field, tmp_path):
    data = storage.field_to_bytes(psd_field)
    with pytest.raises(InvalidInput):
        storage.field_from_bytes(b'NOPE' + data[4:])
    with pytest.raises(InvalidInput):
        storage.field_from_bytes(data[:-16])
    with pytest.raises(InvalidInput):
        storage.load_field(tmp_path / 'missing.czf')


def test_saved_bundles_are_byte_identical(bundle, tmp_path):
    first = storage.save_bundle(bundle, tmp_path / 'a.czb').read_bytes()
    second = storage.save_bundle(bundle, tmp_path / 'b.czb').read_bytes()
    assert first == second


def test_bundle_archive_lists_every_piece(bundle, tmp_path):
    path = storage.save_bundle(bundle, tmp_path / 'bundle.czb')
    with zipfile.ZipFile(path) as archive:
        manifest = json.loads(archive.read('manifest.json'))
    assert manifest['lambda'] == bundle.lam
    assert set(manifest['entries']) == set(storage.bundle_entries(bundle))


def test_loaded_bundle_matches(bundle, tmp_path):
    loaded = storage.load_bundle(storage.save_bundle(bundle, tmp_path / 'bundle.czb'))
    assert loaded.lam == bundle.lam
    assert np.array_equal(loaded.f.values, bundle.f.values)
    assert sorted(loaded.b_pairs) == sorted(bundle.b_pairs)
    assert loaded.cuculescu.active_levels() == bundle.cuculescu.active_levels()


def test_corrupt_bundle_is_rejected(tmp_path):
    path = tmp_path / 'broken.czb'
    path.write_bytes(b'not a zip')
    with pytest.raises(InvalidInput):
        storage.load_bundle(path)


def _reports():
    sweep = DecaySweep.fit('n-k', [(1, 0.5), (2, 0.25), (3, 0.125), (4, 0.0625)], label='random_psd')
    return [
        CheckReport.exact('cz_reconstruction', {'family': 'spike', 'index': 0}, 1e-12, 1e-10, 0.0),
        CheckReport.empirical('weak11', {'family': 'spike', 'index': 0}, 2.5, 64.0),
        CheckReport.decay('boundary_operator_decay', {'scope': 'run'}, [sweep], -0.9),
    ]


def test_run_outputs(tmp_path):
    reports = _reports()
    files = storage.write_run_outputs(reports, tmp_path, exit_status=0)
    for name in ('reports.jsonl', 'summary.csv', 'summary.xlsx', 'manifest.json'):
        assert (tmp_path / name).is_file()
    records = storage.read_reports_jsonl(tmp_path / 'reports.jsonl')
    assert [record['check_id'] for record in records] == [r.check_id for r in reports]
    assert records[1]['pass'] is True
    summary = pd.read_csv(tmp_path / 'summary.csv')
    assert len(summary) == 3
    sheets = pd.read_excel(tmp_path / 'summary.xlsx', sheet_name=None)
    assert set(sheets) == {'cz_reconstruction', 'weak11', 'boundary_operator_decay'}
    assert len(files['sweeps']) == 1
    manifest = json.loads((tmp_path / 'manifest.json').read_text())
    assert manifest['reports'] == 3 and manifest['exit_status'] == 0


def test_report_lines_are_reproducible():
    assert storage.report_lines(_reports()) == storage.report_lines(_reports())
