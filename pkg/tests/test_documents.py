import json
import os

import numpy as np
import pytest

from common.lab_exceptions import DocumentError
from defectlab_cli.documents import (
    dumps_canonical, format_float, load_document, profile_document, profile_from_document, read_csv, write_csv,
    write_json,
)
from property_checker.checker import Regime, check_properties


def test_float_format():
    assert format_float(1.0) == '1.0'
    assert format_float(-3.0) == '-3.0'
    assert format_float(0.1) == '0.10000000000000001'
    assert format_float(1e-20) == '9.9999999999999995e-21'
    assert format_float(float('nan')) == 'null'
    assert format_float(float('inf')) == 'null'


def test_canonical_json_keeps_order_and_types():
    document = {'b': 1, 'a': [0.5, 2.0, None, True], 'nested': {'z': 'text', 'y': []}}
    text = dumps_canonical(document)
    assert text.index('"b"') < text.index('"a"')
    assert json.loads(text) == document
    assert dumps_canonical(json.loads(text)) == text


def test_canonical_json_handles_numpy_values():
    document = {'x': np.float64(0.1), 'n': np.int64(3), 'flag': np.bool_(True), 'half': np.float32(0.5),
                'values': np.array([1.0, 2.5]), 'regime': Regime.ANCHOR, 'missing': float('nan')}
    text = dumps_canonical(document)
    assert '0.10000000000000001' in text
    assert json.loads(text) == {'x': 0.1, 'n': 3, 'flag': True, 'half': 0.5, 'values': [1.0, 2.5],
                                'regime': Regime.ANCHOR.value, 'missing': None}
    with pytest.raises(DocumentError):
        dumps_canonical({'bad': object()})


def test_profile_document_round_trip(tmp_path, solved):
    profile = solved(0.5, 1, 20.0, 256)
    document = profile_document(profile, check_properties(profile))
    path = tmp_path / 'profile.json'
    write_json(str(path), document)
    text = path.read_text()
    loaded = load_document(str(path))
    assert dumps_canonical(loaded) == text
    assert list(loaded) == ['schema_version', 'params', 's_plus', 'arrays', 'solver', 'property_report']

    rebuilt = profile_from_document(loaded)
    np.testing.assert_array_equal(rebuilt.u, profile.u)
    np.testing.assert_array_equal(rebuilt.dv, profile.dv)
    assert rebuilt.params == profile.params and rebuilt.mesh == profile.mesh
    assert profile_document(rebuilt) == profile_document(profile)


def test_document_validation(solved):
    document = profile_document(solved(0.5, 1, 20.0, 256))
    with pytest.raises(DocumentError):
        profile_from_document({**document, 'schema_version': '2'})
    with pytest.raises(DocumentError):
        profile_from_document({key: value for key, value in document.items() if key != 'arrays'})
    with pytest.raises(DocumentError):
        profile_from_document({**document, 'arrays': {**document['arrays'], 'u': document['arrays']['u'][:-1]}})
    shifted = [x + 1e-3 for x in document['arrays']['r']]
    with pytest.raises(DocumentError):
        profile_from_document({**document, 'arrays': {**document['arrays'], 'r': shifted}})


def test_load_rejects_non_json(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{not json')
    with pytest.raises(DocumentError):
        load_document(str(path))


def test_csv_written_atomically(tmp_path):
    path = tmp_path / 'table.csv'
    rows = write_csv(str(path), ('name', 'value'), [('a', 1.0), ('b', np.float64(0.25)), ('c', 3)])
    assert rows == 3
    header, body = read_csv(str(path))
    assert header == ['name', 'value']
    assert body == [['a', '1.0'], ['b', '0.25'], ['c', '3']]
    assert os.listdir(tmp_path) == ['table.csv']
