from django.db import models


class ScenarioRun(models.Model):
    name = models.CharField(max_length=100)
    mode = models.CharField(max_length=20, default='canonical')
    seed = models.BigIntegerField(null=True, blank=True)
    ok = models.BooleanField(default=False)
    report = models.JSONField(default=dict)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.name} ({self.mode}) - {'ok' if self.ok else 'mismatch'}"


class CheckOutcome(models.Model):
    KIND_CHOICES = (
        ('support', 'Support'),
        ('kripke', 'Kripke'),
    )

    run = models.ForeignKey(ScenarioRun, on_delete=models.CASCADE, related_name='checks')
    name = models.CharField(max_length=200)
    kind = models.CharField(max_length=20, choices=KIND_CHOICES, default='support')
    goal = models.TextField()
    expected = models.BooleanField()
    actual = models.BooleanField()

    @property
    def ok(self):
        return self.expected == self.actual

    def __str__(self):
        return f"{self.run.name}: {self.name}"
