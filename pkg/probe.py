# scratch probe, not part of the deliverable
import numpy as np
import time
import clustersync as cs

np.set_printoptions(precision=6, suppress=True)

# --- ship instance ---
tau = (42.21, 107.3)
kappa = (0.181, 0.185)
A = [np.array([[0.0, 1.0], [0.0, -1.0 / t]]) for t in tau]
B = [np.array([[0.0], [k / t]]) for t, k in zip(tau, kappa)]
fam = cs.agent_family(A, B)

print("== ship CARE ==")
t0 = time.perf_counter()
for i in range(2):
    sol = cs.solve_care(A[i], B[i])
    print(f"P{i+1} =\n{sol.P}\nK{i+1} = {sol.K}, residual={sol.residual:.3g}")
print("care time:", time.perf_counter() - t0)

adj = [
    [0.0, 0.0, -5.0, 5.0],
    [1.0, 0.0, -1.0, 1.0],
    [1.0, -1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
]
g = cs.cluster_graph(adj, [[0, 1], [2, 3]])
pl = cs.build_laplacian(g)
print("laplacian:\n", pl.full)
print("balanced grid:\n", cs.check_zero_row_sums(pl))

w22 = cs.WeightingFactors(c=1.0, local=(2.0, 2.0))
red = cs.reduce_laplacian(pl, w22)
print("weighted Lc (c1=c2=2):\n", red.weighted)
print("reduced:\n", red.reduced)
oracle = cs.reduce_via_similarity(pl, w22)
print("similarity oracle:\n", oracle, "max diff", np.max(np.abs(oracle - red.reduced)))

sync = cs.certify_synchronization(fam, pl, w22)
print("ship-cyclic cert:", sync)
w02 = cs.WeightingFactors(c=1.0, local=(0.0, 2.0))
print("ship-nocluster1 cert:", cs.certify_synchronization(fam, pl, w02))

# eigvalsh exactness
ev = np.linalg.eigvalsh(np.array([[0.0, 3.0], [3.0, 0.0]]))
print("eigvalsh [[0,3],[3,0]]:", ev, ev[0] == -3.0, ev[-1] == 3.0)

bounds = cs.weighting_factor_bounds(fam, pl, user_weights=[np.array([[1.0]]), np.array([[1.0]])], c=1.0)
print("ship bounds: c_floor", bounds.c_floor, "local", bounds.local_floors,
      "refined", bounds.c_floor_refined, "rate", bounds.rate)
print("exact local == 2?", bounds.local_floors[0] == 2.0, bounds.local_floors[1] == 2.0)
bounds_d = cs.weighting_factor_bounds(fam, pl, c=1.0)
print("ship bounds default W:", bounds_d.local_floors, bounds_d.weights)

# --- oscillator CARE ---
print("== oscillator CARE ==")
for w in (2.0, 2.5, 3.0):
    a = np.array([[0.0, 1.0], [-w * w, 0.0]])
    b = np.array([[0.0], [1.0]])
    sol = cs.solve_care(a, b)
    print(f"w={w}: K = {sol.K}")

# oscillator bounds
Ao = [np.array([[0.0, 1.0], [-4.0, 0.0]]), np.array([[0.0, 1.0], [-6.25, 0.0]])]
Bo = [np.array([[0.0], [1.0]]), np.array([[0.0], [1.0]])]
fam_o = cs.agent_family(Ao, Bo)
osc_adj = [
    [0, 0, 0, 0, 0, 0],
    [1, 0, 0, 0, 1, -1],
    [1, 0, 0, 0, -1, 1],
    [0, 0, 0, 0, 0, 0],
    [0, 1, -1, 1, 0, 0],
    [0, -1, 1, 1, 0, 0],
]
g_o = cs.cluster_graph(osc_adj, [[0, 1, 2], [3, 4, 5]])
pl_o = cs.build_laplacian(g_o)
print("osc balanced:", cs.check_zero_row_sums(pl_o).all())
w_o = cs.WeightingFactors(c=6.0, local=(13.0, 13.0))
red_o = cs.reduce_laplacian(pl_o, w_o)
print("osc reduced (13,13):\n", red_o.reduced)
print("osc cert:", cs.certify_synchronization(fam_o, pl_o, w_o))
b_o = cs.weighting_factor_bounds(fam_o, pl_o, c=6.0)
print("osc bounds: c_floor", b_o.c_floor, "local", b_o.local_floors, "rate", b_o.rate,
      "refined", b_o.c_floor_refined)

# acyclic ship
ship_acyc = [
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0],
    [1.0, -1.0, 0.0, 0.0],
    [-2.0, 2.0, 1.0, 0.0],
]
g_a = cs.cluster_graph(ship_acyc, [[0, 1], [2, 3]])
pl_a = cs.build_laplacian(g_a)
print("acyclic?", cs.acyclic_partition(g_a))
print("acyclic balanced:", cs.check_zero_row_sums(pl_a).all())
print("acyclic cert:", cs.certify_synchronization(fam, pl_a, w22))
print("acyclic corollary:", cs.certify_acyclic(fam, g_a, pl_a, w22))
print("cyclic graph acyclic?", cs.acyclic_partition(g).acyclic)

# census checks
cen = cs.zero_eigenvalue_census(pl, w22)
print("ship census:", cen)
eigs = np.sort_complex(np.linalg.eigvals(red.weighted))
print("Lc eigs:", eigs)
