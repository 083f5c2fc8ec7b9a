import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from lgot import KantorovichOracle, LeastGradientSolver
from lgot.errors import ConditionViolatedError
from lgot.scenarios import builtin


def test_params_roundtrip():
    est = LeastGradientSolver(atoms=200, grid=64)
    assert est.get_params()["atoms"] == 200
    c = clone(est).set_params(grid=32)
    assert c.grid == 32 and est.grid == 64


def test_fit_predict_disk():
    est = LeastGradientSolver(atoms=200, grid=64).fit("builtin:disk_cosine")
    pts = np.array([[0.3, 0.4], [-0.5, 0.1], [2.0, 0.0]])
    u = est.predict(pts)
    assert u[:2] == pytest.approx([0.3, -0.5], abs=1e-6)
    assert np.isnan(u[2])
    assert est.verdicts_["H3"] == "satisfied"
    assert est.transform([1.5 * np.pi])[0] == pytest.approx(0.5 * np.pi, abs=1e-9)


def test_fit_with_params():
    est = LeastGradientSolver(atoms=200, grid=64).fit("builtin:delta_square", delta=0.2)
    assert est.scenario_.params["delta"] == 0.2
    assert est.predict([[0.5, 0.5]])[0] == pytest.approx(0.2)


def test_strict_raises():
    with pytest.raises(ConditionViolatedError):
        LeastGradientSolver().fit(builtin("delta_square", delta=0.4))
    est = LeastGradientSolver(strict=False).fit(builtin("delta_square", delta=0.4))
    assert est.report_.exit_code == 2


def test_not_fitted():
    with pytest.raises(NotFittedError):
        LeastGradientSolver().predict([[0, 0]])
    with pytest.raises(NotFittedError):
        KantorovichOracle().transform([[0, 0]])


def test_predict_shape_check():
    est = LeastGradientSolver(atoms=100, grid=32).fit("builtin:disk_cosine")
    with pytest.raises(ValueError):
        est.predict(np.zeros((3, 3)))


def test_oracle_estimator():
    X = np.array([[0, 0], [1, 0]], float)
    Y = np.array([[0, 1], [1, 1]], float)
    o = KantorovichOracle(mass=0.5).fit(X, Y)
    assert o.assignment_.tolist() == [0, 1]
    assert o.score() == pytest.approx(-1.0)
    assert o.duality_gap_ <= 1e-12
    assert np.allclose(o.predict([1, 0]), [[1, 1], [0, 1]])
    phi = o.transform(X)
    # the c-transform potential is 1-Lipschitz
    Z = np.random.default_rng(0).random((50, 2))
    pz = o.transform(Z)
    D = np.hypot(*(Z[:, None] - Z[None]).transpose(2, 0, 1))
    assert np.all(np.abs(pz[:, None] - pz[None]) <= D + 1e-12)
    assert phi == pytest.approx(o.potentials_[0])
