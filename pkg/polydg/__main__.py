from polydg.cli import app

app()
