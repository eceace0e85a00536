"""Create runs table"""

import sqlalchemy as sa

from alembic import op

revision = "0001"
down_revision = None
branch_labels = None
depends_on = None


def upgrade() -> None:
    op.create_table(
        "runs",
        sa.Column("id", sa.Integer, primary_key=True),
        sa.Column("date_created", sa.DateTime, nullable=True),
        sa.Column("roster", sa.String, nullable=False),
        sa.Column("players", sa.JSON, nullable=False),
        sa.Column("v_grand", sa.Float, nullable=False),
        sa.Column("t1", sa.Float, nullable=True),
        sa.Column("t2", sa.Float, nullable=True),
        sa.Column("evaluated_count", sa.Integer, nullable=True),
        sa.Column("e_star", sa.Float, nullable=True),
        sa.Column("methods", sa.JSON, nullable=False),
        sa.Column("report", sa.JSON, nullable=False),
    )
    op.create_index("ix_runs_roster", "runs", ["roster"])


def downgrade() -> None:
    op.drop_index("ix_runs_roster", table_name="runs")
    op.drop_table("runs")
