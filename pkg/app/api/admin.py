from django.contrib import admin
from .models import AuditRun


@admin.register(AuditRun)
class AuditRunAdmin(admin.ModelAdmin):
    list_display = ('id', 'kind', 'scheme', 'mode', 'status', 'passed', 'created_at')
    list_filter = ('kind', 'scheme', 'status', 'passed')
    readonly_fields = ('report', 'created_at', 'updated_at')
