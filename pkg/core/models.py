from django.db import models


class RunManifest(models.Model):
    """One command invocation, recorded when TDASUM_RECORD_RUNS is on."""

    command = models.CharField(max_length=50)
    options = models.JSONField(default=dict)
    seed = models.BigIntegerField(null=True, blank=True)
    version = models.CharField(max_length=20)
    inputs = models.JSONField(default=dict)
    outputs = models.JSONField(default=dict)
    out_dir = models.CharField(max_length=500)
    wall_time = models.FloatField()
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.command} -> {self.out_dir}"
