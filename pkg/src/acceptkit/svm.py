"""Feature standardization and a binary SVM trained by sequential minimal
optimization (maximal-violating-pair working set selection), with linear and
RBF kernels. Dual problem: min 1/2 a'Qa - e'a s.t. y'a = 0, 0 <= a <= C."""

from dataclasses import dataclass, field

import numpy as np


class SvmError(ValueError):
    pass


@dataclass
class Scaler:
    mean: np.ndarray
    std: np.ndarray
    constant: np.ndarray  # boolean flags; constant columns pass through unscaled

    def apply(self, X):
        X = np.asarray(X, dtype=float)
        out = X - np.where(self.constant, 0.0, self.mean)
        return out / np.where(self.constant, 1.0, self.std)


def scaler_fit_apply(X):
    X = np.asarray(X, dtype=float)
    if X.shape[0] < 2:
        raise SvmError("need at least 2 rows to fit a scaler")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    constant = std == 0.0
    scaler = Scaler(mean=mean, std=np.where(constant, 1.0, std), constant=constant)
    return scaler, scaler.apply(X)


def kernel_matrix(kind, gamma, A, B):
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if kind == "linear":
        return A @ B.T
    if kind == "rbf":
        sq = (
            np.sum(A * A, axis=1)[:, None]
            + np.sum(B * B, axis=1)[None, :]
            - 2.0 * (A @ B.T)
        )
        return np.exp(-gamma * np.maximum(sq, 0.0))
    raise SvmError("unknown kernel %r" % kind)


@dataclass
class SvmModel:
    kernel: str
    gamma: float
    support_vectors: np.ndarray  # standardized rows with alpha > 0
    dual_coef: np.ndarray  # alpha_i * y_i
    bias: float
    C: float
    scaler: Scaler
    n_features: int
    alphas: np.ndarray = field(default=None)
    sv_labels: np.ndarray = field(default=None)
    full_alpha: np.ndarray = field(default=None)  # duals over the training set

    def decision(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = x[None, :] if single else x
        if X.shape[1] != self.n_features:
            raise SvmError(
                "expected %d features, got %d" % (self.n_features, X.shape[1])
            )
        Xs = self.scaler.apply(X)
        K = kernel_matrix(self.kernel, self.gamma, Xs, self.support_vectors)
        vals = K @ self.dual_coef + self.bias
        return vals[0] if single else vals


def svm_train(X, y, kernel="rbf", C=1.0, gamma=None, tol=1e-3, max_iter=200000,
              scaler=None):
    """SMO training on standardized rows; y in {-1, +1}.

    If `scaler` is None the rows are assumed standardized already and an
    identity scaler is recorded.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    if gamma is None:
        gamma = 1.0 / d
    if not (np.any(y == 1) and np.any(y == -1)):
        raise SvmError("training set must contain both classes")

    K = kernel_matrix(kernel, gamma, X, X)
    alpha = np.zeros(n)
    G = -np.ones(n)  # gradient of the dual objective at alpha = 0
    Kdiag = np.diag(K).copy()

    for _ in range(max_iter):
        yG = -y * G
        up = ((y == 1) & (alpha < C)) | ((y == -1) & (alpha > 0))
        low = ((y == -1) & (alpha < C)) | ((y == 1) & (alpha > 0))
        if not up.any() or not low.any():
            break
        i = np.flatnonzero(up)[np.argmax(yG[up])]
        j = np.flatnonzero(low)[np.argmin(yG[low])]
        if yG[i] - yG[j] < tol:
            break
        eta = Kdiag[i] + Kdiag[j] - 2.0 * K[i, j]
        t_unc = (yG[i] - yG[j]) / max(eta, 1e-12)
        t_max_i = C - alpha[i] if y[i] > 0 else alpha[i]
        t_max_j = alpha[j] if y[j] > 0 else C - alpha[j]
        t = min(t_unc, t_max_i, t_max_j)
        if t <= 0:
            break
        alpha[i] += y[i] * t
        alpha[j] -= y[j] * t
        G += t * y * (K[:, i] - K[:, j])

    sv = alpha > 1e-12
    free = sv & (alpha < C - 1e-12)
    b_est = -y * G  # equals y_i - sum_k alpha_k y_k K_ki
    if free.any():
        b = float(b_est[free].mean())
    else:
        yG = -y * G
        up = ((y == 1) & (alpha < C)) | ((y == -1) & (alpha > 0))
        low = ((y == -1) & (alpha < C)) | ((y == 1) & (alpha > 0))
        hi = yG[up].max() if up.any() else 0.0
        lo = yG[low].min() if low.any() else 0.0
        b = float((hi + lo) / 2.0)

    if scaler is None:
        scaler = Scaler(
            mean=np.zeros(d), std=np.ones(d), constant=np.zeros(d, dtype=bool)
        )
    return SvmModel(
        kernel=kernel,
        gamma=gamma,
        support_vectors=X[sv].copy(),
        dual_coef=(alpha * y)[sv],
        bias=b,
        C=C,
        scaler=scaler,
        n_features=d,
        alphas=alpha[sv].copy(),
        sv_labels=y[sv].copy(),
        full_alpha=alpha,
    )


def svm_predict(model, x):
    """Predict acceptability {0,1} with the signed decision value."""
    val = model.decision(x)
    if np.ndim(val) == 0:
        return (1 if val >= 0 else 0), float(val)
    return (val >= 0).astype(int), val


def dual_objective(alpha, y, K):
    """Value of the maximized dual: sum(a) - 1/2 sum a_i a_j y_i y_j K_ij."""
    ya = np.asarray(alpha) * np.asarray(y)
    return float(np.sum(alpha) - 0.5 * ya @ K @ ya)


def train_full(X_raw, y01, kernel="rbf", C=1.0, gamma=None, tol=1e-3):
    """Standardize raw features and train; y01 in {0,1}."""
    scaler, Xs = scaler_fit_apply(X_raw)
    y = np.where(np.asarray(y01) == 1, 1.0, -1.0)
    return svm_train(Xs, y, kernel=kernel, C=C, gamma=gamma, tol=tol, scaler=scaler)


def save_svm(model, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write("#svm v1 kernel=%s gamma=%s C=%s bias=%s nsv=%d nfeat=%d\n" % (
            model.kernel, repr(float(model.gamma)), repr(float(model.C)),
            repr(float(model.bias)), len(model.dual_coef), model.n_features))
        f.write("mean\t" + "\t".join(repr(float(v)) for v in model.scaler.mean) + "\n")
        f.write("std\t" + "\t".join(repr(float(v)) for v in model.scaler.std) + "\n")
        f.write("const\t" + "\t".join("%d" % v for v in model.scaler.constant) + "\n")
        for coef, row in zip(model.dual_coef, model.support_vectors):
            f.write(repr(float(coef)) + "\t" + "\t".join(repr(float(v)) for v in row) + "\n")


def load_svm(path):
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        if not header or header[0] != "#svm" or header[1] != "v1":
            raise SvmError("bad SVM model header in %s" % path)
        kv = dict(part.split("=") for part in header[2:])
        mean = np.array([float(v) for v in f.readline().split("\t")[1:]])
        std = np.array([float(v) for v in f.readline().split("\t")[1:]])
        const = np.array([int(v) for v in f.readline().split("\t")[1:]], dtype=bool)
        dual = []
        svs = []
        for line in f:
            parts = line.rstrip("\n").split("\t")
            if len(parts) < 2:
                continue
            dual.append(float(parts[0]))
            svs.append([float(v) for v in parts[1:]])
    return SvmModel(
        kernel=kv["kernel"],
        gamma=float(kv["gamma"]),
        support_vectors=np.array(svs),
        dual_coef=np.array(dual),
        bias=float(kv["bias"]),
        C=float(kv["C"]),
        scaler=Scaler(mean=mean, std=std, constant=const),
        n_features=int(kv["nfeat"]),
    )
