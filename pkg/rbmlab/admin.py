from django.contrib import admin
from .models import RunRecord


@admin.register(RunRecord)
class RunRecordAdmin(admin.ModelAdmin):
    list_display = ['mode', 'status', 'exit_code', 'started_at', 'duration_display', 'warning_count']
    list_filter = ['mode', 'status', 'started_at']
    search_fields = ['mode', 'tool_version']
    readonly_fields = ['started_at', 'duration_seconds', 'checksums', 'tool_version']
    date_hierarchy = 'started_at'

    fieldsets = (
        ('Run', {
            'fields': ('mode', 'status', 'exit_code', 'tool_version')
        }),
        ('Configuration', {
            'fields': ('config',),
        }),
        ('Outputs', {
            'fields': ('checksums', 'warnings', 'error'),
        }),
        ('Timing', {
            'fields': ('started_at', 'duration_seconds'),
            'classes': ('collapse',),
        }),
    )

    def duration_display(self, obj):
        return f"{obj.duration_seconds:.2f} s"
    duration_display.short_description = 'Duration'

    def warning_count(self, obj):
        return len(obj.warnings or [])
    warning_count.short_description = 'Warnings'
