"""Profile documents, reports and CSV tables.

JSON documents are canonical: keys keep their insertion order, floats carry 17 significant digits and always show
a '.' or an exponent, non-finite floats become null. Every file is written to a temporary file in the target
directory and moved into place.
"""
import csv
import io
import json
import logging
import math
import os
import tempfile
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from common.lab_exceptions import DocumentError
from profile_solver.mesh import MeshSpec, build_mesh
from profile_solver.profile import Profile, SolverInfo
from property_checker.checker import PropertyReport
from qtensor.core import BulkParams

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"
GRID_TOLERANCE = 1e-12
ARRAY_NAMES = ('r', 'u', 'v', 'du', 'dv')
SPECTRA_COLUMNS = ('block', 'sector', 'index', 'eig_rank', 'eigenvalue', 'residual', 'inertia_below_shift')


def format_float(value: float) -> str:
    if not math.isfinite(value):
        return 'null'
    text = format(value, '.17g')
    if '.' not in text and 'e' not in text:
        text += '.0'
    return text


class CanonicalEncoder(json.JSONEncoder):
    """ json encoder writing floats through `format_float` and numpy scalars, arrays and enums as plain JSON. """

    def default(self, o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, Enum):
            return o.value
        raise DocumentError(f"Cannot serialise {type(o).__name__}.")

    def iterencode(self, o, _one_shot=False):
        markers = {} if self.check_circular else None
        return json.encoder._make_iterencode(
            markers, self.default, json.encoder.py_encode_basestring, self.indent, format_float,
            self.key_separator, self.item_separator, self.sort_keys, self.skipkeys, _one_shot)(o, 0)


def dumps_canonical(document: Any, indent: int = 2) -> str:
    return json.dumps(document, cls=CanonicalEncoder, indent=indent, ensure_ascii=False) + '\n'


def write_text(path: str, text: str) -> None:
    """ Atomically replace `path` with `text`.
    Raises:
        OSError: if the directory is not writable.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, temporary = tempfile.mkstemp(dir=directory, prefix='.defectlab-', suffix='.tmp')
    try:
        with os.fdopen(handle, 'w', encoding='utf-8', newline='') as file:
            file.write(text)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.remove(temporary)
        raise
    logger.debug(f'Wrote {path}')


def write_json(path: str, document: Any) -> None:
    write_text(path, dumps_canonical(document))


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    """ Atomically write a CSV table with floats in the canonical format.
    Returns:
        The number of data rows.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    count = 0
    for row in rows:
        writer.writerow([format_float(float(cell)) if isinstance(cell, (float, np.floating)) else cell
                         for cell in row])
        count += 1
    write_text(path, buffer.getvalue())
    return count


def read_csv(path: str) -> Tuple[List[str], List[List[str]]]:
    with open(path, newline='', encoding='utf-8') as file:
        reader = csv.reader(file)
        header = next(reader)
        return header, [row for row in reader]


def property_document(report: PropertyReport) -> Dict[str, Any]:
    return {
        'regime': report.regime.value,
        'all_satisfied': report.all_satisfied,
        'margins': [{'name': entry.name, 'satisfied': entry.satisfied, 'margin': entry.margin,
                     'location': entry.location, 'radius': entry.radius, 'status': entry.status.value}
                    for entry in report.margins],
    }


def profile_document(profile: Profile, report: PropertyReport = None) -> Dict[str, Any]:
    """ Canonical document of a profile, with its property report embedded when given. """
    mesh, solver = profile.mesh, profile.solver
    arrays = {'r': profile.r, 'u': profile.u, 'v': profile.v, 'du': profile.du, 'dv': profile.dv}
    return {
        'schema_version': SCHEMA_VERSION,
        'params': {'t': float(profile.params.t), 'k': int(profile.params.k), 'r_max': float(mesh.r_max),
                   'nodes': int(mesh.nodes), 'grading': mesh.grading.value, 'ratio': float(mesh.ratio)},
        's_plus': float(profile.s_plus),
        'arrays': {name: None if values is None else [float(x) for x in values] for name, values in arrays.items()},
        'solver': {'iterations': int(solver.iterations), 'residual_norm': float(profile.residual_norm),
                   'continuation_steps': int(solver.continuation_steps), 'converged': bool(solver.converged),
                   'tolerance': float(solver.tolerance),
                   'stopped_at_t': None if solver.stopped_at_t is None else float(solver.stopped_at_t)},
        'property_report': property_document(report) if report is not None else None,
    }


def _require(document: Mapping[str, Any], *keys: str) -> None:
    missing = [key for key in keys if key not in document]
    if missing:
        raise DocumentError(f"Profile document lacks {missing}.")


def load_document(path: str) -> Dict[str, Any]:
    """ Raises:
        OSError: if the file cannot be read.
        DocumentError: if the file is not JSON.
    """
    with open(path, encoding='utf-8') as file:
        try:
            return json.load(file)
        except json.JSONDecodeError as e:
            raise DocumentError(f"{path} is not a JSON document: {e}")


def profile_from_document(document: Mapping[str, Any]) -> Profile:
    """ Rebuild a Profile from its document.
    Raises:
        DocumentError: on a missing field, a foreign schema version, unequal array lengths or a grid that differs
            from the one the mesh parameters generate.
    """
    _require(document, 'schema_version', 'params', 'arrays', 'solver')
    if document['schema_version'] != SCHEMA_VERSION:
        raise DocumentError(f"Unsupported schema version {document['schema_version']}.")
    params, arrays, solver = document['params'], document['arrays'], document['solver']
    _require(params, 't', 'k', 'r_max', 'nodes', 'grading')
    _require(arrays, *ARRAY_NAMES)
    lengths = {len(values) for values in arrays.values() if values is not None}
    if len(lengths) != 1:
        raise DocumentError(f"Profile arrays have unequal lengths {sorted(lengths)}.")
    mesh = MeshSpec(float(params['r_max']), int(params['nodes']), params['grading'], float(params.get('ratio', 1.001)))
    r = build_mesh(mesh)
    stored = np.array(arrays['r'], dtype=float)
    if len(stored) != len(r) or np.max(np.abs(stored - r)) > GRID_TOLERANCE * mesh.r_max:
        raise DocumentError("Stored radii do not match the grid of the stored mesh parameters.")
    info = SolverInfo(iterations=int(solver.get('iterations', 0)),
                      continuation_steps=int(solver.get('continuation_steps', 0)),
                      converged=bool(solver.get('converged', True)), tolerance=float(solver.get('tolerance', 0.0)),
                      stopped_at_t=solver.get('stopped_at_t'))
    return Profile.from_arrays(BulkParams(float(params['t']), int(params['k'])), mesh, arrays['u'], arrays['v'],
                               du=arrays['du'], dv=arrays['dv'], solver=info)
