"""Self-convergence of the SO(3) square relation for the four-point Fuchsian system."""

from pfaffian_tau.isomonodromy import DEFAULT_PARAMS, iso_square_check


def main():
    rep = iso_square_check(DEFAULT_PARAMS, [4, 6, 8, 12, 16])
    print(f"tau_W[SL2]^2 = {(rep['tau_w_sl2'] ** 2).real:.15f}")
    print(f"tau_O[SO3]   = {rep['tau_o_so3'].real:.15f}")
    print(f"JMU exponent = {rep['exponent'].real:g}")
    print(" M  residual")
    for row in rep["convergence_table"]:
        print(f"{row['M']:>2}  {row['residual']:.3e}")
    for w in rep["warnings"]:
        print("warning:", w)


if __name__ == "__main__":
    main()
