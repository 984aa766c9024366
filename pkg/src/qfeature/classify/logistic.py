"""Multinomial logistic regression by full-batch gradient descent."""
import numpy as np


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class Logistic:
    """Cross-entropy with an L2 penalty on the weights (not the bias).

    Each epoch takes one gradient step whose length is found by backtracking
    (Armijo condition), so the loss never increases. Training stops when the
    decrease falls below ``tol`` or after ``max_epochs``.
    """

    def __init__(self, l2=1e-3, tol=1e-8, max_epochs=5000, step0=1.0):
        self.l2 = l2
        self.tol = tol
        self.max_epochs = max_epochs
        self.step0 = step0

    def _loss_grad(self, w, xb, onehot):
        p = _softmax(xb @ w)
        n = len(xb)
        loss = -np.sum(onehot * np.log(np.maximum(p, 1e-300))) / n
        loss += 0.5 * self.l2 * np.sum(w[1:] ** 2)
        grad = xb.T @ (p - onehot) / n
        grad[1:] += self.l2 * w[1:]
        return loss, grad

    def fit(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        self.classes_, yi = np.unique(np.asarray(y), return_inverse=True)
        onehot = np.eye(len(self.classes_))[yi]
        xb = np.hstack([np.ones((len(x), 1)), x])
        w = np.zeros((xb.shape[1], len(self.classes_)))
        loss, grad = self._loss_grad(w, xb, onehot)
        step = self.step0
        self.losses_ = [loss]
        self.converged_ = False
        for _ in range(self.max_epochs):
            g2 = np.sum(grad**2)
            step *= 2.0
            while True:
                w_new = w - step * grad
                loss_new, grad_new = self._loss_grad(w_new, xb, onehot)
                if loss_new <= loss - 0.5 * step * g2 or step < 1e-12:
                    break
                step *= 0.5
            if loss_new > loss:
                # no descent possible at machine precision
                self.converged_ = True
                break
            decrease = loss - loss_new
            w, loss, grad = w_new, loss_new, grad_new
            self.losses_.append(loss)
            if decrease < self.tol:
                self.converged_ = True
                break
        self.coef_ = w
        self.flags = [] if self.converged_ else ["logistic: not converged"]
        return self

    def predict_proba(self, x):
        x = np.asarray(x, dtype=np.float64)
        return _softmax(np.hstack([np.ones((len(x), 1)), x]) @ self.coef_)

    def predict(self, x):
        return self.classes_[np.argmax(self.predict_proba(x), axis=1)]
