"""Compiled RRT* tree growth over a boolean occupancy raster."""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def segment_free(x0, y0, x1, y1, cells, ox, oy, cs, res):
    h, w = cells.shape
    n = int(math.ceil(math.hypot(x1 - x0, y1 - y0) / res))
    if n < 1:
        n = 1
    for k in range(n + 1):
        t = k / n
        x = x0 + t * (x1 - x0)
        y = y0 + t * (y1 - y0)
        c = int(math.floor((x - ox) / cs))
        r = int(math.floor((y - oy) / cs))
        if r < 0 or r >= h or c < 0 or c >= w:
            return False
        if cells[r, c]:
            return False
    return True


@njit(cache=True)
def _detach(j, parent, first_child, next_sibling):
    p = parent[j]
    if p < 0:
        return
    if first_child[p] == j:
        first_child[p] = next_sibling[j]
    else:
        k = first_child[p]
        while next_sibling[k] != j:
            k = next_sibling[k]
        next_sibling[k] = next_sibling[j]
    next_sibling[j] = -1


@njit(cache=True)
def _attach(j, p, parent, first_child, next_sibling):
    parent[j] = p
    next_sibling[j] = first_child[p]
    first_child[p] = j


@njit(cache=True)
def _shift_subtree(root, delta, cost, first_child, next_sibling, stack):
    top = 0
    k = first_child[root]
    while k >= 0:
        stack[top] = k
        top += 1
        k = next_sibling[k]
    while top > 0:
        top -= 1
        j = stack[top]
        cost[j] -= delta
        k = first_child[j]
        while k >= 0:
            stack[top] = k
            top += 1
            k = next_sibling[k]


@njit(cache=True)
def grow_tree(samples, start, goal, cells, ox, oy, cs, step, goal_radius, gamma_len, res):
    """Run RRT* over the pre-drawn ``samples``.

    Returns ``(nodes, parent, cost, n_nodes, best_node, best_cost)`` where
    ``best_node`` is the goal-region node with the cheapest collision-free
    connection to ``goal`` (``-1`` if none) and ``best_cost`` includes that
    final connection.
    """
    m = samples.shape[0] + 1
    nodes = np.empty((m, 2))
    parent = -np.ones(m, dtype=np.int64)
    cost = np.zeros(m)
    first_child = -np.ones(m, dtype=np.int64)
    next_sibling = -np.ones(m, dtype=np.int64)
    stack = np.empty(m, dtype=np.int64)
    near = np.empty(m, dtype=np.int64)
    near_d = np.empty(m)
    nodes[0, 0] = start[0]
    nodes[0, 1] = start[1]
    n = 1
    best_node = -1
    best_cost = np.inf
    goal_nodes = np.empty(m, dtype=np.int64)
    n_goal = 0

    for it in range(samples.shape[0]):
        sx = samples[it, 0]
        sy = samples[it, 1]
        nearest = 0
        dmin = np.inf
        for j in range(n):
            d = (nodes[j, 0] - sx) ** 2 + (nodes[j, 1] - sy) ** 2
            if d < dmin:
                dmin = d
                nearest = j
        dmin = math.sqrt(dmin)
        if dmin == 0.0:
            continue
        if dmin > step:
            nx = nodes[nearest, 0] + (sx - nodes[nearest, 0]) * step / dmin
            ny = nodes[nearest, 1] + (sy - nodes[nearest, 1]) * step / dmin
        else:
            nx = sx
            ny = sy
        if not segment_free(nodes[nearest, 0], nodes[nearest, 1], nx, ny, cells, ox, oy, cs, res):
            continue

        radius = gamma_len * math.sqrt(math.log(n + 1.0) / (n + 1.0))
        if radius < step:
            radius = step
        r2 = radius * radius
        n_near = 0
        for j in range(n):
            d = (nodes[j, 0] - nx) ** 2 + (nodes[j, 1] - ny) ** 2
            if d <= r2:
                near[n_near] = j
                near_d[n_near] = math.sqrt(d)
                n_near += 1

        # choose parent: cheapest collision-free candidate
        best_p = nearest
        best_c = cost[nearest] + math.hypot(nodes[nearest, 0] - nx, nodes[nearest, 1] - ny)
        for q in range(n_near):
            j = near[q]
            c = cost[j] + near_d[q]
            if c < best_c and j != nearest:
                if segment_free(nodes[j, 0], nodes[j, 1], nx, ny, cells, ox, oy, cs, res):
                    best_c = c
                    best_p = j

        new = n
        nodes[new, 0] = nx
        nodes[new, 1] = ny
        cost[new] = best_c
        _attach(new, best_p, parent, first_child, next_sibling)
        n += 1

        # rewire neighbours through the new node
        for q in range(n_near):
            j = near[q]
            if j == best_p:
                continue
            c = best_c + near_d[q]
            if c < cost[j] - 1e-12:
                if segment_free(nx, ny, nodes[j, 0], nodes[j, 1], cells, ox, oy, cs, res):
                    delta = cost[j] - c
                    _detach(j, parent, first_child, next_sibling)
                    _attach(j, new, parent, first_child, next_sibling)
                    cost[j] = c
                    _shift_subtree(j, delta, cost, first_child, next_sibling, stack)

        if math.hypot(nx - goal[0], ny - goal[1]) <= goal_radius:
            if segment_free(nx, ny, goal[0], goal[1], cells, ox, oy, cs, res):
                goal_nodes[n_goal] = new
                n_goal += 1

        # costs only ever decrease, so the running best is monotone
        for q in range(n_goal):
            j = goal_nodes[q]
            c = cost[j] + math.hypot(nodes[j, 0] - goal[0], nodes[j, 1] - goal[1])
            if c < best_cost:
                best_cost = c
                best_node = j

    return nodes[:n], parent[:n], cost[:n], n, best_node, best_cost
