"""k-nearest-neighbour classifier with Euclidean distance."""
import numpy as np


class KNN:
    def __init__(self, k=5):
        self.k = k

    def fit(self, x, y):
        self.x_ = np.asarray(x, dtype=np.float64)
        self.y_ = np.asarray(y)
        if self.k > len(self.y_):
            raise ValueError(f"k={self.k} exceeds training size {len(self.y_)}")
        self.classes_ = np.unique(self.y_)
        return self

    def predict(self, x):
        x = np.asarray(x, dtype=np.float64)
        d2 = (
            np.sum(x**2, axis=1)[:, None]
            - 2.0 * x @ self.x_.T
            + np.sum(self.x_**2, axis=1)[None, :]
        )
        d = np.sqrt(np.maximum(d2, 0.0))
        nn = np.argsort(d, axis=1, kind="stable")[:, : self.k]
        out = np.empty(len(x), dtype=self.y_.dtype)
        for i, row in enumerate(nn):
            labels = self.y_[row]
            votes = np.array([np.sum(labels == c) for c in self.classes_])
            top = np.flatnonzero(votes == votes.max())
            if len(top) > 1:
                # tie: class whose neighbours are closest in sum
                sums = [d[i, row[labels == self.classes_[c]]].sum() for c in top]
                top = [top[int(np.argmin(sums))]]
            out[i] = self.classes_[top[0]]
        return out
