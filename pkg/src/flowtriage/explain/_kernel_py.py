"""Pure-Python TreeSHAP kernel.

Path-dependent polynomial-time Shapley computation for a single tree: the
conditional expectation over a feature coalition weights branches by node
cover, and contributions are accumulated via the EXTEND/UNWIND path algebra.
The compiled module in ``_treeshap.pyx`` implements the identical recursion;
this module is the drop-in fallback selected at import time.
"""

NAME = "python"


def _extend(path, p_z, p_o, p_i):
    l = len(path)
    path = [row[:] for row in path]
    path.append([p_i, p_z, p_o, 1.0 if l == 0 else 0.0])
    for i in range(l - 1, -1, -1):
        path[i + 1][3] += p_o * path[i][3] * (i + 1) / (l + 1)
        path[i][3] = p_z * path[i][3] * (l - i) / (l + 1)
    return path


def _unwind(path, i):
    l = len(path)
    one, zero = path[i][2], path[i][1]
    n = path[l - 1][3]
    path = [row[:] for row in path]
    for j in range(l - 2, -1, -1):
        if one != 0.0:
            t = path[j][3]
            path[j][3] = n * l / ((j + 1) * one)
            n = t - path[j][3] * zero * (l - 1 - j) / l
        else:
            path[j][3] = path[j][3] * l / (zero * (l - 1 - j))
    for j in range(i, l - 1):
        path[j][0], path[j][1], path[j][2] = path[j + 1][0], path[j + 1][1], path[j + 1][2]
    path.pop()
    return path


def _unwound_sum(path, i):
    return sum(row[3] for row in _unwind(path, i))


def tree_shap_one(feature_index, threshold, left, right, leaf_value, cover,
                  x, phi, scale):
    """Accumulate scaled SHAP contributions of one tree for one instance."""

    def recurse(node, path, p_z, p_o, p_i):
        path = _extend(path, p_z, p_o, p_i)
        f = int(feature_index[node])
        if f < 0:
            for i in range(1, len(path)):
                w = _unwound_sum(path, i)
                phi[int(path[i][0])] += (
                    w * (path[i][2] - path[i][1]) * leaf_value[node] * scale
                )
            return
        if x[f] < threshold[node]:
            hot, cold = int(left[node]), int(right[node])
        else:
            hot, cold = int(right[node]), int(left[node])
        i_z, i_o = 1.0, 1.0
        k = next((i for i in range(1, len(path)) if int(path[i][0]) == f), None)
        if k is not None:
            i_z, i_o = path[k][1], path[k][2]
            path = _unwind(path, k)
        recurse(hot, path, i_z * cover[hot] / cover[node], i_o, f)
        recurse(cold, path, i_z * cover[cold] / cover[node], 0.0, f)

    recurse(0, [], 1.0, 1.0, -1)


def tree_shap_batch(feature_index, threshold, left, right, leaf_value, cover,
                    X, phi, scale, max_depth):
    for r in range(len(X)):
        tree_shap_one(feature_index, threshold, left, right, leaf_value, cover,
                      X[r], phi[r], scale)
