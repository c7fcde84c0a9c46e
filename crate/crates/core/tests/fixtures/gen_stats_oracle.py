# Regenerates stats_oracle.json with statsmodels/scipy as the reference.
import json
import numpy as np
import statsmodels.api as sm
from statsmodels.stats.multitest import multipletests
from scipy import stats

out = {}

def logit_case(x, y, dummies=None, names=None):
    cols = [np.ones(len(x)), np.asarray(x, float)]
    if dummies is not None:
        cols += [np.asarray(d, float) for d in dummies]
    X = np.column_stack(cols)
    r = sm.Logit(np.asarray(y, float), X).fit(method="newton", tol=1e-14, maxiter=200, disp=0)
    return {
        "x": list(map(float, x)), "y": list(map(int, y)),
        "dummies": [list(map(float, d)) for d in (dummies or [])],
        "dummy_names": names or [],
        "params": r.params.tolist(), "bse": r.bse.tolist(),
        "z": r.tvalues.tolist(), "p": r.pvalues.tolist(),
    }

out["logit_small"] = logit_case([1, 2, 3, 4, 5, 6], [0, 0, 1, 0, 1, 1])

rng = np.random.default_rng(20240611)
n = 80
dom = rng.choice(["a", "b", "c"], size=n, p=[0.5, 0.3, 0.2])
x = np.round(rng.normal(0, 1, n), 6)
eta = -0.3 + 0.9 * x + 0.7 * (dom == "b") - 0.8 * (dom == "c")
y = (rng.random(n) < 1 / (1 + np.exp(-eta))).astype(int)
case = logit_case(x, y, [(dom == "b").astype(float), (dom == "c").astype(float)], ["b", "c"])
case["domains"] = dom.tolist()
out["logit_dummies"] = case

def bh(p):
    rej, adj, _, _ = multipletests(p, alpha=0.05, method="fdr_bh")
    return {"p": p, "adjusted": adj.tolist(), "reject": rej.tolist()}

out["bh"] = [bh([0.01, 0.02, 0.03, 0.04]), bh([0.001, 0.8]), bh([0.04, 0.001, 0.03, 0.2, 0.012, 0.5, 0.049])]

def sp(x, y):
    r = stats.spearmanr(x, y)
    return {"x": x, "y": y, "rho": float(r.statistic), "p": float(r.pvalue)}

out["spearman"] = [sp([1, 2, 2, 4], [1, 3, 2, 4]),
                   sp([3.1, 1.2, 5.5, 2.2, 2.2, 9.0, 4.4, 0.5], [2.0, 1.0, 4.0, 4.0, 3.0, 7.0, 5.0, 0.0])]

raters = [[4, 5, 3, 4, 2, 5, 4, 3], [5, 5, 3, 3, 2, 4, 4, 2], [4, 4, 2, 4, 3, 5, 5, 3]]
pairs = [(0, 1), (0, 2), (1, 2)]
rs = [float(np.corrcoef(raters[i], raters[j])[0, 1]) for i, j in pairs]
out["pearson"] = {"raters": raters, "pairwise": rs, "mean": float(np.mean(rs))}

json.dump(out, open("stats_oracle.json", "w"), indent=1)
