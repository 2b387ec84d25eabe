"""Print the training-overhead table (pilots per scheme) for the default setup."""

from nfbeam.cli import table1_overhead

if __name__ == "__main__":
    print("scheme,formula,pilots")
    for scheme, formula, value in table1_overhead():
        print(f"{scheme},{formula},{value}")
