# Generated by Django 6.0 on 2026-10-12 09:41

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="RunRecord",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "mode",
                    models.CharField(
                        choices=[
                            ("covariance", "Covariance profile"),
                            ("sample", "RBM samples"),
                            ("mc-f2", "Monte Carlo F2"),
                            ("limit", "Crossover limit"),
                            ("kstar-spectrum", "K* spectrum"),
                            ("crossover-scan", "Crossover scan"),
                            ("compare", "MC vs limit"),
                            ("diagnostics", "Transfer diagnostics"),
                        ],
                        max_length=20,
                    ),
                ),
                (
                    "config",
                    models.JSONField(help_text="Validated experiment configuration"),
                ),
                ("tool_version", models.CharField(max_length=100)),
                (
                    "status",
                    models.CharField(
                        choices=[
                            ("success", "Success"),
                            ("usage_error", "Usage error"),
                            ("numerical_error", "Numerical error"),
                        ],
                        default="success",
                        max_length=20,
                    ),
                ),
                ("exit_code", models.IntegerField(default=0)),
                ("started_at", models.DateTimeField()),
                ("duration_seconds", models.FloatField(default=0.0)),
                (
                    "checksums",
                    models.JSONField(
                        blank=True,
                        default=dict,
                        help_text="Output file name -> sha256",
                    ),
                ),
                (
                    "warnings",
                    models.JSONField(
                        blank=True,
                        default=list,
                        help_text="Accuracy flags and dropped-sample notes raised during the run",
                    ),
                ),
                ("error", models.JSONField(blank=True, null=True)),
            ],
            options={
                "ordering": ["-started_at"],
                "indexes": [
                    models.Index(fields=["mode", "status"], name="rbmlab_run_mode_status_idx"),
                    models.Index(fields=["started_at"], name="rbmlab_run_started_idx"),
                ],
            },
        ),
    ]
