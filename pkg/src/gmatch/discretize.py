import numpy as np

from gmatch.core import Assignment, ValidationError, as_matrix


def greedy_discretize(x) -> Assignment:
    """Round a soft assignment to a partial permutation greedily.

    Repeatedly takes the largest entry among the rows and columns not yet
    used, until every column is matched.  Ties go to the smaller row
    index, then the smaller column index.  O(nn' log nn') via one sort.
    """
    x = as_matrix(x, "x")
    n, n_prime = x.shape
    if n < n_prime:
        raise ValidationError(f"need n >= n', got {n}x{n_prime}")
    # stable sort on -x keeps row-major order among ties
    order = np.argsort(-x, axis=None, kind="stable")
    row_used = np.zeros(n, dtype=bool)
    mapping = np.full(n_prime, -1, dtype=np.int64)
    left = n_prime
    for flat in order:
        if left == 0:
            break
        i, j = divmod(int(flat), n_prime)
        if row_used[i] or mapping[j] >= 0:
            continue
        row_used[i] = True
        mapping[j] = i
        left -= 1
    return Assignment(mapping, n)
