# %% [markdown]
# # Pinning by a narrow defect
# The analytic criterion gives the critical Dirac strength. The reduced
# model then shows a front stalling just above it and passing just below.

# %%
from frontlab import pinning

res = pinning.analyze(0.3, 0.3)
print(f"beta_c = {res.beta_c:.4f}, x0_pin = {res.x0_pin:.4f}, w_pin = {res.w_pin:.4f}")

# %%
for beta in (0.95 * res.beta_c, 1.05 * res.beta_c):
    probe = pinning.dirac_probe(0.3, 0.3, t_max=20000.0)
    verdict = probe(beta)
    print(f"beta = {beta:.3f}: pinned={verdict.pinned}, x0={verdict.x0_final:.3f}")
