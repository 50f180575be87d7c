REPORT_HEADER = """Decay verification report
=========================

Equation: u_tt - u_ttxx - u_xx + V(x) u + u_t = 0 on [-{L:g}, {L:g}] ({bc}), n = {n}, h = {h:.6g}
Potential: {family}, V0 = {V0:g}, alpha = {alpha:g}
Initial data: {data}
Time stepping: RK4 ({rhs} right-hand side), dt = {dt:g}, T = {T:g}, {steps} steps, sample every {sample_every}
Provenance: {provenance}
"""

REPAIR_NOTES = """Constant repairs
----------------
(a) C1^2 and K3^2 use the SUM K2^2 + K1^2, not the product;
    the sum is what the energy identity integrated against u produces.
(b) L0^2 = E2(0) + ||V''||^2/(4 delta) J0^2 + 2 ||V'||^2/(4 delta) K1^2 + ½||sqrt(V) Δu0||^2,
    the combination the second-energy estimate actually closes with.
(c) L1^2 is the combination that closes the weighted second-energy estimate.
(d) The coefficient of ∫||u||^2 in L0^2 is the Young constant ||V''||^2/(4 delta).
    The cross term split with (2||V'|| |∇u| |Δu_t|) actually needs 4 ||V'||^2/(4 delta);
    the factor 2 is kept and the check decides.
Signed constants I0^2, B0 and C0 are used as computed, without clamping.
"""

WARNINGS_BLOCK = """Warnings
--------
{warnings}
"""

CONSTANTS_HEADER = """Constant ledger
---------------
"""

CONSTANT_ROW = "{name:<18} = {value: .10e}\n"

TABLE_HEADER = """Inequality suite ({passed}/{total} passed, relative slack {tol:g})
------------------------------------------------------------------
{id:<10} {t:>10} {lhs:>18} {rhs:>18} {margin:>18}  {status}
"""

TABLE_ROW = "{id:<10} {t:>10.4f} {lhs:>18.10e} {rhs:>18.10e} {margin:>18.10e}  {status}{note}\n"

AUXILIARY_HEADER = """
Auxiliary bounds
----------------
"""

IDENTITY_HEADER = """
Identity residuals (relative to E(0))
-------------------------------------
"""

IDENTITY_ROW = "{name:<24} {value:.3e}\n"

FIT_BLOCK = """
Decay fit
---------
window [{t_min:g}, {t_max:g}] ({n_samples} samples): slope d log E / d log(1+t) = {slope:.6f}
intercept = {intercept:.6f}, residual RMS = {residual_rms:.3e}
"""

NO_FIT_BLOCK = """
Decay fit
---------
not available: {reason}
"""

APPENDIX_BLOCK = """
Semigroup checks ({n_random} random states, seed {seed})
--------------------------------------------------
max |<AU, U>| / ||U||^2          {skew:.3e}
Yosida identity L J w = w - J w  {yosida_identity:.3e}
max ||J w|| / ||w||              {yosida_contraction:.6f}
(I - A) block solve residual     {resolvent_residual:.3e}
semigroup vs direct rhs          {rhs_agreement:.3e}
A + L_V + F vs semigroup rhs     {generator_residual:.3e}
||L_V|| power iteration          {lv_norm:.6f} (bound {lv_norm_bound:.6f})
status                           {status}
"""

VALIDATION_BLOCK = """Potential validation
--------------------
family = {family}, alpha = {alpha:g}
alpha_eff = sup |V'|/V = {alpha_eff:.6g}
||V|| = {Vinf:.6g}, ||V'|| = {V1inf:.6g}, ||V''|| = {V2inf:.6g}
alpha^2 ||V|| = {smallness:.6g}
status: {status}
"""

CONVERGENCE_ROW = "{study:<10} {level:<8} {parameter:>14.6g} {energy:>22.15e}\n"

CONVERGENCE_SUMMARY = """
spatial order   = {spatial}
temporal order  = {temporal}
domain doubling = {doubling:.3e} relative change of E(T)
status: {status}
"""
