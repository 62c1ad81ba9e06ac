# Generated by Django 5.0.6 on 2024-09-01 09:00

import django.db.models.deletion
from django.conf import settings
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
        migrations.swappable_dependency(settings.AUTH_USER_MODEL),
    ]

    operations = [
        migrations.CreateModel(
            name='AuditRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('kind', models.CharField(choices=[('correctness', 'Correctness'), ('privacy', 'Privacy'), ('colluding', 'Colluding')], max_length=20)),
                ('scheme', models.CharField(max_length=20)),
                ('params', models.JSONField(default=dict)),
                ('mode', models.CharField(blank=True, default='', max_length=20)),
                ('seed', models.BigIntegerField()),
                ('trials', models.PositiveIntegerField(default=100)),
                ('status', models.CharField(choices=[('Pending', 'Pending'), ('Running', 'Running'), ('Completed', 'Completed'), ('Failed', 'Failed')], default='Pending', max_length=20)),
                ('report', models.JSONField(blank=True, null=True)),
                ('passed', models.BooleanField(blank=True, null=True)),
                ('error', models.TextField(blank=True, default='')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('requested_by', models.ForeignKey(blank=True, null=True, on_delete=django.db.models.deletion.SET_NULL, related_name='audit_runs', to=settings.AUTH_USER_MODEL)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
    ]
