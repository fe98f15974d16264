"""Bundled example contracts and ground-truth specifications."""

from importlib import resources

NAMES = ("erc20_mini", "erc20", "erc721_mini", "bec", "bec_checked")
# contracts whose reproduction needs a narrower integer width
WIDTHS = {"bec": 64, "bec_checked": 64}


def source(name: str) -> str:
    return resources.files(__package__).joinpath(f"{name}.mc").read_text(encoding="utf-8")


def ground_truth(name: str) -> str | None:
    path = resources.files(__package__).joinpath(f"{name}.spec")
    return path.read_text(encoding="utf-8") if path.is_file() else None


def load(name: str):
    from ..lang import parse_contract
    return parse_contract(source(name), width=WIDTHS.get(name, 256))
