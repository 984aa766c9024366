"""CART classifier with Gini impurity and impurity-decrease importances."""
import numpy as np


class DecisionTree:
    """Fully grown binary tree by default (no depth limit, leaves of size 1).

    ``max_features`` limits the features examined per split (used by the
    forest); the split threshold is the midpoint of adjacent sorted values.
    """

    def __init__(self, max_depth=None, min_samples_leaf=1, max_features=None, seed=0):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.seed = seed

    def fit(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        self.classes_, yi = np.unique(np.asarray(y), return_inverse=True)
        self.n_features_ = x.shape[1]
        self._rng = np.random.default_rng(self.seed)
        self._imp = np.zeros(self.n_features_)
        # node arrays: feature, threshold, left, right, value
        self._feat, self._thr, self._left, self._right, self._value = [], [], [], [], []
        self._grow(x, yi, depth=0)
        total = self._imp.sum()
        self.feature_importances_ = self._imp / total if total > 0 else self._imp
        return self

    def _new_node(self, counts):
        self._feat.append(-1)
        self._thr.append(0.0)
        self._left.append(-1)
        self._right.append(-1)
        self._value.append(counts)
        return len(self._feat) - 1

    def _grow(self, x, y, depth):
        n_cls = len(self.classes_)
        counts = np.bincount(y, minlength=n_cls).astype(np.float64)
        node = self._new_node(counts)
        n = len(y)
        gini = 1.0 - np.sum((counts / n) ** 2)
        if gini <= 0.0 or n < 2 * self.min_samples_leaf:
            return node
        if self.max_depth is not None and depth >= self.max_depth:
            return node
        split = self._best_split(x, y, counts)
        if split is None:
            return node
        feat, thr, gain = split
        self._imp[feat] += n * gain
        mask = x[:, feat] <= thr
        self._feat[node] = feat
        self._thr[node] = thr
        self._left[node] = self._grow(x[mask], y[mask], depth + 1)
        self._right[node] = self._grow(x[~mask], y[~mask], depth + 1)
        return node

    def _best_split(self, x, y, counts):
        n, d = x.shape
        n_cls = len(counts)
        parent = 1.0 - np.sum((counts / n) ** 2)
        feats = np.arange(d)
        if self.max_features is not None and self.max_features < d:
            feats = np.sort(self._rng.choice(d, self.max_features, replace=False))
        best = None
        onehot = np.eye(n_cls)[y]
        leaf = self.min_samples_leaf
        for f in feats:
            order = np.argsort(x[:, f], kind="stable")
            xs = x[order, f]
            left = np.cumsum(onehot[order], axis=0)[:-1]
            nl = np.arange(1, n, dtype=np.float64)
            nr = n - nl
            right = counts - left
            g_l = 1.0 - np.sum(left**2, axis=1) / nl**2
            g_r = 1.0 - np.sum(right**2, axis=1) / nr**2
            child = (nl * g_l + nr * g_r) / n
            valid = (xs[1:] > xs[:-1]) & (nl >= leaf) & (nr >= leaf)
            if not np.any(valid):
                continue
            child = np.where(valid, child, np.inf)
            i = int(np.argmin(child))
            gain = parent - child[i]
            if best is None or gain > best[2] + 1e-15:
                best = (int(f), 0.5 * (xs[i] + xs[i + 1]), gain)
        if best is None or best[2] <= 0.0:
            return None
        return best

    def _leaf_counts(self, row):
        node = 0
        while self._feat[node] >= 0:
            node = self._left[node] if row[self._feat[node]] <= self._thr[node] else self._right[node]
        return self._value[node]

    def predict_proba(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.array([self._leaf_counts(r) for r in x])
        return out / out.sum(axis=1, keepdims=True)

    def predict(self, x):
        return self.classes_[np.argmax(self.predict_proba(x), axis=1)]

    @property
    def node_count(self):
        return len(self._feat)


class TreeEnsemble:
    """Bagged trees; ``n_estimators=1`` is a single tree on all the data."""

    def __init__(self, n_estimators=1, seed=0, **tree_kw):
        self.n_estimators = n_estimators
        self.seed = seed
        self.tree_kw = tree_kw

    def fit(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y)
        self.classes_ = np.unique(y)
        if self.n_estimators == 1:
            self.trees_ = [DecisionTree(seed=self.seed, **self.tree_kw).fit(x, y)]
        else:
            rng = np.random.default_rng(self.seed)
            kw = dict(self.tree_kw)
            kw.setdefault("max_features", max(1, int(np.sqrt(x.shape[1]))))
            self.trees_ = []
            for i in range(self.n_estimators):
                idx = rng.integers(0, len(y), len(y))
                self.trees_.append(DecisionTree(seed=self.seed + i + 1, **kw).fit(x[idx], y[idx]))
        imp = np.mean([t.feature_importances_ for t in self.trees_], axis=0)
        self.feature_importances_ = imp / imp.sum() if imp.sum() > 0 else imp
        return self

    def predict(self, x):
        votes = np.zeros((len(x), len(self.classes_)))
        for t in self.trees_:
            p = t.predict_proba(x)
            cols = np.searchsorted(self.classes_, t.classes_)
            votes[:, cols] += p
        return self.classes_[np.argmax(votes, axis=1)]
