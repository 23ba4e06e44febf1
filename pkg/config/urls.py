"""
URL configuration for the band matrix laboratory.

Only the admin is routed; it is used to browse the RunRecord ledger.
"""

from django.contrib import admin
from django.urls import path

urlpatterns = [
    path("admin/", admin.site.urls),
]
