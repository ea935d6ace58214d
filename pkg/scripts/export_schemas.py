"""Write the config and report JSON schemas to docs/."""
from pathlib import Path

from finsler_product.config import dumps
from finsler_product.schema import CONFIG_SCHEMA, REPORT_SCHEMA

DOCS = Path(__file__).resolve().parents[1] / "docs"


def main():
    DOCS.mkdir(exist_ok=True)
    (DOCS / "config.schema.json").write_text(dumps(CONFIG_SCHEMA))
    (DOCS / "report.schema.json").write_text(dumps(REPORT_SCHEMA))
    print(f"wrote schemas to {DOCS}")


if __name__ == "__main__":
    main()
