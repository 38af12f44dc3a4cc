import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liftchar import fileio
from liftchar import random_instances as ri
from liftchar.charfunc import char_symbol
from liftchar.exceptions import FileFormatError

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.data())
def test_matrix_round_trip_is_bitwise(r, c, data):
    vals = data.draw(st.lists(st.tuples(finite, finite), min_size=r * c, max_size=r * c))
    m = np.array([complex(a, b) for a, b in vals]).reshape(r, c)
    kind, back = fileio.loads(fileio.dumps(fileio.matrix_doc(m)))
    assert kind == "matrix"
    assert back.tobytes() == m.tobytes()


def test_lifting_round_trip(rng, tmp_path):
    L = ri.random_lifting(2, 2, 1, rng)
    path = tmp_path / "l.json"
    fileio.write(path, fileio.lifting_doc(L))
    kind, back = fileio.read(path, "lifting")
    assert kind == "lifting" and (back.p, back.q, back.d) == (2, 1, 2)
    for a, b in zip(back.E, L.E):
        assert a.tobytes() == np.asarray(b, complex).tobytes()


def test_symbol_round_trip(rng, tmp_path):
    S = char_symbol(ri.random_lifting(2, 1, 1, rng), 3)
    path = tmp_path / "s.json"
    fileio.write(path, fileio.symbol_doc(S))
    _, back = fileio.read(path, "symbol")
    assert back.leakage_bound == S.leakage_bound and back.tail_profile == S.tail_profile
    for w in S.idx.words:
        assert back[w].tobytes() == S[w].tobytes()


def test_empty_blocks_round_trip():
    L = fileio.parse_document(fileio.lifting_doc(
        ri.random_lifting(1, 0, 2, np.random.default_rng(0))))[1]
    assert L.p == 0 and L.B[0].shape == (2, 0)


def test_state_and_row_contraction_kinds(rng):
    T = ri.random_row_contraction(3, 2, rng)
    kind, back = fileio.loads(fileio.dumps(fileio.row_contraction_doc(T)))
    assert kind == "row_contraction" and len(back) == 3
    kind, rho = fileio.loads(fileio.dumps(fileio.state_doc(np.eye(2) / 2)))
    assert kind == "state" and np.array_equal(rho, np.eye(2) / 2)


@pytest.mark.parametrize("doc, msg", [
    ({"kind": "row_contraction", "d": 1, "dim": 1, "matrices": []}, "holds 0 matrices"),
    ({"kind": "row_contraction", "d": 0, "dim": 1, "matrices": []}, "'d' must be an integer >= 1"),
    ({"kind": "row_contraction", "d": 1, "dim": 2, "matrices": [[[[1, 0], [0, 0]], [[0, 0]]]]},
     "row 1 has 1 entries"),
    ({"kind": "row_contraction", "d": 1, "dim": 1, "matrices": [[[[1, 0, 0]]]]}, "[re, im] pair"),
    ({"kind": "row_contraction", "d": 1, "dim": 1, "matrices": [[[[1e400, 0]]]]}, "not finite"),
    ({"kind": "row_contraction", "d": 1, "dim": 2, "matrices": [[[[1, 0]]]]}, "expected (2, 2)"),
    ({"kind": "nonsense"}, "unknown kind"),
    ({"kind": "lifting", "d": 1, "p": 1, "q": 1, "dim": 3, "C": [], "A": [], "B": []},
     "dim must equal p + q"),
    ({"kind": "symbol", "d": 1, "N": 1, "dom_dim": 1, "cod_dim": 1,
      "coeffs": [{"word": [2], "matrix": [[[1, 0]]]}]}, "invalid word"),
    ({"kind": "symbol", "d": 1, "N": 1, "dom_dim": 1, "cod_dim": 1,
      "coeffs": [{"word": [1, 1], "matrix": [[[1, 0]]]}]}, "longer than N"),
])
def test_malformed_documents(doc, msg):
    with pytest.raises(FileFormatError) as exc:
        fileio.loads(json.dumps(doc))
    assert msg in str(exc.value)


def test_json_error_has_position():
    with pytest.raises(FileFormatError) as exc:
        fileio.loads('{"kind":\n  oops}', "f.json")
    assert "f.json: line 2" in str(exc.value)


def test_wrong_kind_rejected(tmp_path):
    path = tmp_path / "m.json"
    fileio.write(path, fileio.matrix_doc(np.eye(1)))
    with pytest.raises(FileFormatError, match="expected lifting"):
        fileio.read(path, "lifting")


def test_missing_file(tmp_path):
    with pytest.raises(FileFormatError):
        fileio.read(tmp_path / "none.json")
