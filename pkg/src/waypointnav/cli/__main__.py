import sys

import waypointnav.cli as cli


def __main__() -> None:
    sys.exit(cli.run(sys.argv[1:]))


if __name__ == "__main__":
    __main__()
