def format_float(x: float) -> str:
    """Shortest round-trip representation, locale independent."""
    return repr(float(x))


def parse_key_values(lines: list[str]) -> dict[str, str]:
    return dict(line.split("=", 1) for line in lines if "=" in line)
