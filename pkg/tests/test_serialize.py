import numpy as np
from hypothesis import given

from conftest import seeds, shapes
from qmlab import models, serialize
from qmlab.instances import random_cpmap, random_element, random_state
from qmlab.maps import maps_equal
from qmlab.report import BoundReport


@given(shapes, seeds)
def test_element_round_trip_is_exact(shape, seed):
    e = random_element(shape, seed)
    back = serialize.loads(serialize.dumps(e))
    assert all(np.array_equal(a, b) for a, b in zip(e.blocks, back.blocks))


@given(shapes, seeds)
def test_state_round_trip(shape, seed):
    s = random_state(shape, seed)
    assert serialize.loads(serialize.dumps(s)).density == s.density


@given(shapes, shapes, seeds)
def test_cpmap_round_trip(dom, cod, seed):
    m = random_cpmap(dom, cod, 2, seed)
    assert maps_equal(serialize.loads(serialize.dumps(m)), m, tol=0.0)


def test_setup_and_report_round_trip():
    s = models.unsharp_spin_setup(0.1)
    back = serialize.loads(serialize.dumps(s))
    assert back.pointer == s.pointer and back.measured == s.measured
    rep = BoundReport("cs", 0.0, 1.0, extras={"k": 2.0})
    assert serialize.loads(serialize.dumps(rep)).to_record() == rep.to_record()
