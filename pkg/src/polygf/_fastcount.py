"""Low-level enumeration kernel for the polygon census.

The kernel walks the tree of canonically rooted boundary words by depth-first
backtracking and tallies every closed self-avoiding polygon it meets.  It is
compiled with numba (nogil), so several kernel calls can run in parallel from
a thread pool, one per disjoint prefix of the search tree.

Canonical rooting convention (shared with ``census``):

* the traversal starts at the lowest-then-leftmost vertex, placed at the
  origin, so every vertex satisfies ``y > 0`` or (``y == 0`` and ``x >= 0``);
* the first step is E and the closing step into the origin is S, which fixes
  the counterclockwise orientation;
* vertices are pairwise distinct (self-avoiding) and the walk is closed.

Each polygon is recorded in ``counts3d[h, v, m]`` where ``h``/``v`` are the
horizontal/vertical half-perimeters and ``m`` the concavity index.  Convex
polygons (``m == 0``) additionally land in ``flags0[h, v, bits]`` where the
bit mask encodes staircase/unimodal/pyramid/stack membership.  Polygons with
``m`` equal to 1 or 2 can optionally be captured verbatim as packed step
words (2 bits per step, step ``i`` in bits ``2i..2i+1``) for the fine-grained
classifier, which runs in plain Python.
"""

import numpy as np

from numba import njit

# Step encoding shared by the whole package: E=0, N=1, W=2, S=3.
DX = (1, 0, -1, 0)
DY = (0, 1, 0, -1)

STATUS_OK = 0
STATUS_OVERFLOW = 1


@njit(cache=True, nogil=True)
def dfs_kernel(cap, prefix_packed, plen, counts3d, flags0, words, metas, capture):  # pragma: no cover - jit
    """Enumerate all canonical polygons extending a packed prefix.

    Returns ``(status, nwords)``.  ``status`` is ``STATUS_OVERFLOW`` when the
    word buffer filled up, in which case the caller retries with a larger
    buffer; counts written so far must then be discarded.
    """
    maxsteps = 2 * cap
    stride = 2 * cap + 3
    offx = cap + 1
    visited = np.zeros((cap + 2) * stride, dtype=np.uint8)
    word = np.zeros(maxsteps + 1, dtype=np.int8)
    dirnext = np.zeros(maxsteps + 2, dtype=np.int8)
    save_minx = np.zeros(maxsteps + 2, dtype=np.int16)
    save_maxx = np.zeros(maxsteps + 2, dtype=np.int16)
    save_maxy = np.zeros(maxsteps + 2, dtype=np.int16)

    dx = (1, 0, -1, 0)
    dy = (0, 1, 0, -1)

    x = 0
    y = 0
    minx = 0
    maxx = 0
    maxy = 0
    ecount = 0
    ncount = 0
    visited[offx] = 1  # origin

    # Replay the prefix (assumed canonical and self-avoiding).
    for i in range(plen):
        d = (prefix_packed >> (2 * i)) & 3
        word[i] = d
        save_minx[i] = minx
        save_maxx[i] = maxx
        save_maxy[i] = maxy
        x += dx[d]
        y += dy[d]
        if x < minx:
            minx = x
        if x > maxx:
            maxx = x
        if y > maxy:
            maxy = y
        if d == 0:
            ecount += 1
        elif d == 1:
            ncount += 1
        visited[y * stride + x + offx] = 1

    depth = plen
    dirnext[depth] = 0
    nwords = 0
    status = STATUS_OK

    while True:
        d = dirnext[depth]
        if d > 3 or (depth == 0 and d > 0):
            # Exhausted this node: backtrack.
            if depth == plen:
                break
            depth -= 1
            dprev = word[depth]
            visited[y * stride + x + offx] = 0
            x -= dx[dprev]
            y -= dy[dprev]
            minx = save_minx[depth]
            maxx = save_maxx[depth]
            maxy = save_maxy[depth]
            if dprev == 0:
                ecount -= 1
            elif dprev == 1:
                ncount -= 1
            continue
        dirnext[depth] = d + 1
        nx = x + dx[d]
        ny = y + dy[d]
        if nx == 0 and ny == 0:
            if d == 3 and depth >= 3:
                # Closed polygon: word[0..depth-1] plus this final S step.
                word[depth] = 3
                length = depth + 1
                h = ecount
                v = ncount
                m = h + v - (maxx - minx) - maxy
                counts3d[h, v, m] += 1
                if m == 0:
                    # staircase: no E/N step after the first W/S step.
                    bits = 0
                    turned = False
                    stair = True
                    for i in range(length):
                        s = word[i]
                        if s == 2 or s == 3:
                            turned = True
                        elif turned:
                            stair = False
                            break
                    last_e = -1
                    first_w = length
                    last_n = -1
                    first_s = length
                    for i in range(length):
                        s = word[i]
                        if s == 0:
                            last_e = i
                        elif s == 2 and first_w == length:
                            first_w = i
                        elif s == 1:
                            last_n = i
                        elif s == 3 and first_s == length:
                            first_s = i
                    unimodal = last_e < first_w and last_n < first_s
                    width = maxx - minx
                    pyramid = minx == 0
                    if pyramid:
                        for i in range(width):
                            if word[i] != 0:
                                pyramid = False
                                break
                    stack = minx == 0
                    if stack:
                        for i in range(length - maxy, length):
                            if word[i] != 3:
                                stack = False
                                break
                    if stair:
                        bits |= 1
                    if unimodal:
                        bits |= 2
                    if pyramid:
                        bits |= 4
                    if stack:
                        bits |= 8
                    flags0[h, v, bits] += 1
                elif m <= 2 and capture:
                    if nwords >= words.shape[0]:
                        status = STATUS_OVERFLOW
                        break
                    packed = np.uint64(0)
                    for i in range(length):
                        packed |= np.uint64(word[i]) << np.uint64(2 * i)
                    words[nwords] = packed
                    metas[nwords] = (m << 10) | (h << 5) | v
                    nwords += 1
            continue
        if ny < 0 or (ny == 0 and nx < 0):
            continue
        if depth + 1 + abs(nx) + abs(ny) > maxsteps:
            continue
        idx = ny * stride + nx + offx
        if visited[idx]:
            continue
        # Take the step.
        word[depth] = d
        save_minx[depth] = minx
        save_maxx[depth] = maxx
        save_maxy[depth] = maxy
        x = nx
        y = ny
        if x < minx:
            minx = x
        if x > maxx:
            maxx = x
        if y > maxy:
            maxy = y
        if d == 0:
            ecount += 1
        elif d == 1:
            ncount += 1
        visited[idx] = 1
        depth += 1
        dirnext[depth] = 0

    return status, nwords


def run_chunk(cap, prefix_packed, plen, capture, word_buffer=1 << 16):
    """Run the kernel for one prefix, growing the capture buffer on demand."""
    size = word_buffer if capture else 1
    while True:
        counts3d = np.zeros((cap + 1, cap + 1, cap + 1), dtype=np.int64)
        flags0 = np.zeros((cap + 1, cap + 1, 16), dtype=np.int64)
        words = np.zeros(size, dtype=np.uint64)
        metas = np.zeros(size, dtype=np.uint16)
        status, nwords = dfs_kernel(
            cap, np.uint64(prefix_packed), plen, counts3d, flags0, words, metas, capture
        )
        if status == STATUS_OK:
            return counts3d, flags0, words[:nwords], metas[:nwords]
        size *= 4
