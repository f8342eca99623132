"""Print tau_O, tau_W and the nonzero minor tables of the four built-in examples.

The B2 example (J3) only shows its weight <= 4 minors.
"""

from pfaffian_tau.algebra import format_scalar
from pfaffian_tau.drinfeld_sokolov import example_problem
from pfaffian_tau.engines import format_minor_table, widom_tau


def main():
    for name in ("J1", "J2", "J4", "J3"):
        pb = example_problem(name)
        tau = pb.tau()
        print(f"== {name} on {pb.spec}")
        if name == "J3":
            # the general B2 tau has hundreds of terms; show the a2 = 0 slice
            print(f"tau_O(a2 = 0) = {format_scalar(tau.value.subs({'a2': 0}))}")
        else:
            print(f"tau_O = {tau}")
            w = widom_tau(pb.a_kernel(6), pb.d_kernel(), 6, method="series")
            print(f"tau_W = {format_scalar(w.value)}")
        print(format_minor_table(pb.tables(4 if name == "J3" else None)))
        print()


if __name__ == "__main__":
    main()
