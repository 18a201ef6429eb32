from .cli import app


def run() -> None:
    """Console entry point."""
    app(prog_name="fsikit")


if __name__ == "__main__":
    run()
