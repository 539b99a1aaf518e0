# app/main.py
from app.cli.commands import app


def run():
    app(prog_name="realfloor")


if __name__ == "__main__":
    run()
