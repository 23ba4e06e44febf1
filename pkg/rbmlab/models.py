from django.db import models


class RunRecord(models.Model):
    """Ledger entry for one experiment run: config echo, outputs and warnings."""
    MODE_CHOICES = [
        ('covariance', 'Covariance profile'),
        ('sample', 'RBM samples'),
        ('mc-f2', 'Monte Carlo F2'),
        ('limit', 'Crossover limit'),
        ('kstar-spectrum', 'K* spectrum'),
        ('crossover-scan', 'Crossover scan'),
        ('compare', 'MC vs limit'),
        ('diagnostics', 'Transfer diagnostics'),
    ]

    STATUS_CHOICES = [
        ('success', 'Success'),
        ('usage_error', 'Usage error'),
        ('numerical_error', 'Numerical error'),
    ]

    mode = models.CharField(max_length=20, choices=MODE_CHOICES)
    config = models.JSONField(help_text="Validated experiment configuration")
    tool_version = models.CharField(max_length=100)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='success')
    exit_code = models.IntegerField(default=0)
    started_at = models.DateTimeField()
    duration_seconds = models.FloatField(default=0.0)
    checksums = models.JSONField(
        default=dict,
        blank=True,
        help_text="Output file name -> sha256"
    )
    warnings = models.JSONField(
        default=list,
        blank=True,
        help_text="Accuracy flags and dropped-sample notes raised during the run"
    )
    error = models.JSONField(null=True, blank=True)

    class Meta:
        ordering = ['-started_at']
        indexes = [
            models.Index(fields=['mode', 'status'], name='rbmlab_run_mode_status_idx'),
            models.Index(fields=['started_at'], name='rbmlab_run_started_idx'),
        ]

    def __str__(self):
        return f"{self.mode} @ {self.started_at:%Y-%m-%d %H:%M:%S} ({self.status})"

    @property
    def succeeded(self):
        return self.exit_code == 0

    def to_dict(self):
        """JSON sidecar written next to the run outputs."""
        return {
            'mode': self.mode,
            'config': self.config,
            'tool_version': self.tool_version,
            'status': self.status,
            'exit_code': self.exit_code,
            'started_at': self.started_at.isoformat(),
            'duration_seconds': self.duration_seconds,
            'checksums': self.checksums,
            'warnings': self.warnings,
            'error': self.error,
        }
