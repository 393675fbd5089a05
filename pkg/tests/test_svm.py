import numpy as np
import pytest

from acceptkit import svm


def qp_oracle_objective(X, y, kernel, gamma, C):
    """Brute-force dual maximization via a generic QP solver (cvxopt)."""
    import cvxopt

    cvxopt.solvers.options["show_progress"] = False
    n = len(y)
    K = svm.kernel_matrix(kernel, gamma, X, X)
    Q = np.outer(y, y) * K
    P = cvxopt.matrix(Q + 1e-10 * np.eye(n))
    q = cvxopt.matrix(-np.ones(n))
    G = cvxopt.matrix(np.vstack([-np.eye(n), np.eye(n)]))
    h = cvxopt.matrix(np.hstack([np.zeros(n), C * np.ones(n)]))
    A = cvxopt.matrix(y.reshape(1, -1))
    b = cvxopt.matrix(np.zeros(1))
    sol = cvxopt.solvers.qp(P, q, G, h, A, b)
    alpha = np.array(sol["x"]).ravel()
    return svm.dual_objective(alpha, y, K)


FIXTURES = [
    # (X, y, kernel, gamma) with at most 12 points each
    (np.array([[0.0, 0.0], [1.0, 1.0]]), np.array([-1.0, 1.0]), "linear", 0.5),
    (
        np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]),
        np.array([-1.0, -1.0, 1.0, 1.0]),
        "rbf",
        1.0,
    ),
    (
        np.array(
            [
                [0.1, 0.2], [0.3, -0.1], [-0.2, 0.4], [1.5, 1.2], [1.1, 1.8],
                [2.0, 1.1], [0.2, 0.1], [1.9, 1.5], [-0.5, 0.0], [1.3, 0.9],
            ]
        ),
        np.array([-1.0, -1.0, -1.0, 1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0]),
        "rbf",
        0.7,
    ),
    (
        np.array(
            [
                [0.0, 1.0], [0.2, 0.8], [0.5, 0.5], [0.9, 0.2], [1.0, 0.0],
                [0.4, 0.6], [0.7, 0.3], [0.1, 0.9], [0.6, 0.4], [0.3, 0.7],
                [0.8, 0.1], [0.05, 0.95],
            ]
        ),
        np.array([1.0, 1.0, -1.0, -1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0]),
        "linear",
        1.0,
    ),
]


def test_scaler_two_points():
    scaler, Z = svm.scaler_fit_apply(np.array([[1.0], [3.0]]))
    assert np.allclose(Z.ravel(), [-1.0, 1.0])


def test_scaler_constant_column():
    scaler, Z = svm.scaler_fit_apply(np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]]))
    assert scaler.constant[0] and not scaler.constant[1]
    assert np.allclose(Z[:, 0], 5.0)


def test_scaler_idempotent_on_train():
    X = np.array([[1.0, 2.0], [3.0, 1.0], [2.0, 4.0]])
    scaler, Z = svm.scaler_fit_apply(X)
    assert np.allclose(scaler.apply(X), Z)
    assert np.allclose(Z.mean(axis=0), 0.0, atol=1e-9)
    assert np.allclose(Z.var(axis=0), 1.0, atol=1e-6)


def test_scaler_needs_two_rows():
    with pytest.raises(svm.SvmError):
        svm.scaler_fit_apply(np.array([[1.0, 2.0]]))


def test_linear_separable():
    X = np.array([[0.0, 0.0], [1.0, 1.0]])
    y = np.array([-1.0, 1.0])
    model = svm.svm_train(X, y, kernel="linear")
    labels, _ = svm.svm_predict(model, X)
    assert list(labels) == [0, 1]


def test_xor_rbf():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    y = np.array([-1.0, -1.0, 1.0, 1.0])
    model = svm.svm_train(X, y, kernel="rbf", gamma=1.0, C=100.0)
    labels, _ = svm.svm_predict(model, X)
    assert list(labels) == [0, 0, 1, 1]


def test_single_class_rejected():
    with pytest.raises(svm.SvmError):
        svm.svm_train(np.zeros((3, 2)), np.ones(3))


def test_dual_feasibility_and_kkt():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(40, 3))
    y = np.where(X[:, 0] + 0.3 * rng.normal(size=40) > 0, 1.0, -1.0)
    if len(set(y)) < 2:
        y[0] = -y[0]
    C, tol = 1.0, 1e-3
    model = svm.svm_train(X, y, kernel="rbf", C=C, tol=tol)
    alpha = model.full_alpha
    assert np.all(alpha >= 0) and np.all(alpha <= C)
    assert abs(np.dot(alpha, y)) < 1e-8
    # KKT audit at tolerance 10*tol
    fx = np.array([model.decision(x) for x in X])
    margins = y * fx
    for a, m in zip(alpha, margins):
        if a < 1e-9:
            assert m >= 1 - 10 * tol
        elif a > C - 1e-9:
            assert m <= 1 + 10 * tol
        else:
            assert abs(m - 1) <= 10 * tol


@pytest.mark.parametrize("idx", range(len(FIXTURES)))
def test_smo_matches_qp_oracle(idx):
    X, y, kernel, gamma = FIXTURES[idx]
    C = 1.0
    model = svm.svm_train(X, y, kernel=kernel, gamma=gamma, C=C, tol=1e-5)
    K = svm.kernel_matrix(kernel, gamma, X, X)
    smo_obj = svm.dual_objective(model.full_alpha, y, K)
    oracle_obj = qp_oracle_objective(X, y, kernel, gamma, C)
    assert smo_obj == pytest.approx(oracle_obj, abs=1e-4)


def test_margin_condition_for_free_svs():
    X, y, kernel, gamma = FIXTURES[2]
    tol = 1e-3
    model = svm.svm_train(X, y, kernel=kernel, gamma=gamma, tol=tol)
    for a, lab, sv in zip(model.alphas, model.sv_labels, model.support_vectors):
        if a < model.C - 1e-9:
            val = svm.kernel_matrix(model.kernel, model.gamma, sv[None, :],
                                    model.support_vectors) @ model.dual_coef + model.bias
            assert abs(float(val[0]) - lab) <= 10 * tol


def test_predict_dimension_check():
    X = np.array([[0.0, 0.0], [1.0, 1.0]])
    model = svm.svm_train(X, np.array([-1.0, 1.0]), kernel="linear")
    with pytest.raises(svm.SvmError):
        model.decision(np.zeros(5))


def test_predict_deterministic_duplicate():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [0.9, 1.1]])
    y = np.array([-1.0, 1.0, 1.0])
    model = svm.svm_train(X, y, kernel="rbf", gamma=0.5)
    l1, _ = svm.svm_predict(model, X[1])
    l2, _ = svm.svm_predict(model, np.array([1.0, 1.0]))
    assert l1 == l2


def test_train_full_and_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    X = rng.normal(size=(30, 17))
    y = (X[:, 0] > 0).astype(int)
    if y.min() == y.max():
        y[0] = 1 - y[0]
    model = svm.train_full(X, y, kernel="rbf")
    path = tmp_path / "m.svm"
    svm.save_svm(model, path)
    loaded = svm.load_svm(path)
    p1, s1 = svm.svm_predict(model, X)
    p2, s2 = svm.svm_predict(loaded, X)
    assert np.array_equal(p1, p2)
    assert np.allclose(s1, s2)
